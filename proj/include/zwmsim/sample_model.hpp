#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "zwmsim/spectral_core.hpp"

namespace zwmsim {

/// One absorption line of an atomic-mixture sample.
struct LorentzianLine {
    double center = 0.0; ///< line center frequency
    double width = 0.0;  ///< FWHM-scale width Gamma, > 0
    double depth = 0.0;  ///< optical depth at line center, >= 0
};

/// Frequency-dependent amplitude transmissivity of the four-port sample in
/// the idler-1 path. The sample is modeled as a lossless beam splitter:
/// whatever is not transmitted scatters into the vacuum port, so the rear
/// reflectivity is always sqrt(1 - |T|^2).
struct SampleModel {
    enum class Kind { Flat, BeamSplitter, LorentzianMixture };

    Kind kind = Kind::Flat;
    Complex t0{1.0, 0.0};             ///< Flat / BeamSplitter amplitude
    std::vector<LorentzianLine> lines; ///< LorentzianMixture only

    static SampleModel flat(Complex t) { return {Kind::Flat, t, {}}; }
    static SampleModel beam_splitter(Complex t) { return {Kind::BeamSplitter, t, {}}; }
    static SampleModel lorentzian_mixture(std::vector<LorentzianLine> lines) {
        return {Kind::LorentzianMixture, Complex(1.0, 0.0), std::move(lines)};
    }

    void validate() const {
        if (kind != Kind::LorentzianMixture) {
            if (std::abs(t0) > 1.0 + 1e-12)
                throw numerical_error("sample: |t0| must not exceed 1");
        } else {
            for (const auto& line : lines) {
                if (!(line.width > 0.0))
                    throw numerical_error("sample: line width must be positive");
                if (line.depth < 0.0)
                    throw numerical_error("sample: line depth must be non-negative");
            }
        }
    }
};

/// T(omega). The mixture uses a complex Lorentzian exponent,
/// exp(-sum_j d_j / (1 + 2i(omega - omega_j)/Gamma_j)), so the phase of T is
/// dispersion-consistent; absorbers in series compose multiplicatively.
inline Complex transmissivity(const SampleModel& model, double omega) {
    if (model.kind != SampleModel::Kind::LorentzianMixture)
        return model.t0;
    Complex exponent{0.0, 0.0};
    for (const auto& line : model.lines)
        exponent += line.depth / (1.0 + Complex(0.0, 2.0 * (omega - line.center) / line.width));
    return std::exp(-exponent);
}

/// R'(omega) = sqrt(1 - |T(omega)|^2), the lossless four-port complement.
inline double rear_reflectivity(const SampleModel& model, double omega) {
    const double t2 = std::norm(transmissivity(model, omega));
    return std::sqrt(std::max(0.0, 1.0 - t2));
}

} // namespace zwmsim
