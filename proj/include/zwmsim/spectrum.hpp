#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "zwmsim/spectral_core.hpp"

namespace zwmsim {

enum class Fidelity { Full, GoodCavity, CombResolved, Oracle };

inline const char* to_string(Fidelity f) {
    switch (f) {
    case Fidelity::Full: return "full";
    case Fidelity::GoodCavity: return "good_cavity";
    case Fidelity::CombResolved: return "comb_resolved";
    case Fidelity::Oracle: return "oracle";
    }
    return "?";
}

/// Sampled output signal spectrum S(omega), arbitrary units. The global
/// scale convention is that a single-mode, T = 0 spectrum peaks at 4/gamma.
struct Spectrum {
    FrequencyGrid grid;
    std::vector<double> values;
    Fidelity fidelity = Fidelity::Full;
    double phi = 0.0;    ///< signal-path relative phase
    double varphi = 0.0; ///< idler propagation phase
    double residual_imag = 0.0; ///< max |Im| discarded when taking the real part
    std::vector<std::string> warnings;

    double peak() const {
        return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    }
};

} // namespace zwmsim
