#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "zwmsim/errors.hpp"

namespace zwmsim {

using Complex = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

/// sinc(x) = sin(x)/x, continued to sinc(0) = 1. Series below 1e-4 to
/// avoid cancellation.
inline double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

/// Cavity regime parameters. All frequencies are angular, in whatever unit
/// system the caller picks; only the ratios gamma/delta_omega and
/// delta_omega*tau matter for the physics.
struct CavityParams {
    double gamma = 0.0;       ///< cavity damping (loss) rate
    double delta_omega = 0.0; ///< free spectral range
    double tau = 0.0;         ///< signal-idler transit-time difference (may be negative)
    double omega_s = 0.0;     ///< signal center frequency
    double omega_p = 0.0;     ///< pump frequency

    /// Idler center, fixed by energy conservation.
    double omega_i() const { return omega_p - omega_s; }

    /// Finesse is derived, never stored.
    double finesse() const { return kPi / gamma; }

    void validate() const {
        if (!(gamma > 0.0))
            throw numerical_error("cavity: gamma must be positive");
        if (!(delta_omega > 0.0))
            throw numerical_error("cavity: delta_omega must be positive");
    }
};

/// Crystal-in-resonator geometry from which the cavity parameters derive.
struct PhysicalGeometry {
    double crystal_length = 0.0;   ///< l
    double resonator_length = 0.0; ///< L
    double v_gs = 0.0;             ///< signal group velocity in the crystal
    double v_gi = 0.0;             ///< idler group velocity in the crystal
    double c = 1.0;                ///< vacuum light speed in the same units

    void validate() const {
        if (!(crystal_length > 0.0) || !(resonator_length >= crystal_length))
            throw numerical_error("geometry: requires 0 < l <= L");
        if (!(c > 0.0) || !(v_gs > 0.0) || !(v_gi > 0.0) || v_gs > c || v_gi > c)
            throw numerical_error("geometry: group velocities must be in (0, c]");
    }
};

/// Round-trip time 2l/v_gS + 2(L-l)/c fixes the free spectral range;
/// tau = l(1/v_gI - 1/v_gS).
inline CavityParams derive_cavity_params(const PhysicalGeometry& geom, double omega_s,
                                         double omega_p, double gamma) {
    geom.validate();
    const double round_trip =
        2.0 * geom.crystal_length / geom.v_gs +
        2.0 * (geom.resonator_length - geom.crystal_length) / geom.c;
    if (!(round_trip > 0.0))
        throw numerical_error("geometry: non-positive round-trip time");
    CavityParams p;
    p.gamma = gamma;
    p.delta_omega = 2.0 * kPi / round_trip;
    p.tau = geom.crystal_length * (1.0 / geom.v_gi - 1.0 / geom.v_gs);
    p.omega_s = omega_s;
    p.omega_p = omega_p;
    p.validate();
    return p;
}

/// Symmetric truncation window for the comb-mode sums.
struct CombIndexRange {
    int m_min = 0;
    int m_max = 0;
    bool truncation_warning = false; ///< set when the hard cap was applied

    int size() const { return m_max - m_min + 1; }

    void validate() const {
        if (m_min > 0 || m_max < 0)
            throw numerical_error("comb range: requires m_min <= 0 <= m_max");
    }
};

/// Hard cap on modes per side when the sinc envelope cannot truncate the sum.
inline constexpr int kFlatEnvelopeModeCap = 64;

/// Phase-mismatch factor for the m-th cavity-resonant signal mode:
/// sinc(m*dw*tau/2) * exp(-i*m*dw*tau/2).
inline Complex phase_mismatch_factor(int m, const CavityParams& params) {
    const double x = 0.5 * m * params.delta_omega * params.tau;
    return sinc(x) * std::exp(Complex(0.0, -x));
}

/// Complex cavity lineshape sqrt(gamma) / (gamma/2 - i*Omega). Its squared
/// magnitude is the Lorentzian gamma / ((gamma/2)^2 + Omega^2), FWHM gamma,
/// integral 2*pi.
inline Complex cavity_lineshape(double Omega, double gamma) {
    return std::sqrt(gamma) / Complex(0.5 * gamma, -Omega);
}

/// Smallest symmetric range keeping every mode up to the first sinc zero,
/// plus any sidelobe mode whose envelope weight still reaches envelope_cut.
/// A degenerate (tau ~ 0) envelope is clamped to kFlatEnvelopeModeCap per
/// side and flagged.
inline CombIndexRange default_comb_range(const CavityParams& params, double envelope_cut) {
    params.validate();
    if (!(envelope_cut > 0.0 && envelope_cut < 1.0))
        throw numerical_error("comb range: envelope_cut must lie in (0, 1)");

    const double x1 = 0.5 * params.delta_omega * std::abs(params.tau);
    if (x1 == 0.0 || kPi / x1 > 1.0 + kFlatEnvelopeModeCap)
        return {-kFlatEnvelopeModeCap, kFlatEnvelopeModeCap, true};

    const int m_zero = static_cast<int>(std::ceil(kPi / x1));
    int m_max = std::max(1, m_zero - 1);
    for (int m = m_zero; m < (1 << 15); ++m) {
        const double bound = 1.0 / ((m * x1) * (m * x1)); // sinc envelope
        if (bound < envelope_cut)
            break;
        if (std::norm(phase_mismatch_factor(m, params)) >= envelope_cut)
            m_max = m;
    }
    return {-m_max, m_max, false};
}

/// Uniform frequency grid, endpoints inclusive.
struct FrequencyGrid {
    double start = 0.0;
    double stop = 0.0;
    int n_points = 0;

    static FrequencyGrid linspace(double start, double stop, int n_points) {
        if (n_points < 2 || !(stop > start))
            throw numerical_error("grid: requires stop > start and n_points >= 2");
        return {start, stop, n_points};
    }

    double spacing() const { return (stop - start) / (n_points - 1); }
    double at(int k) const { return start + (stop - start) * k / (n_points - 1); }

    std::vector<double> values() const {
        std::vector<double> v(n_points);
        for (int k = 0; k < n_points; ++k)
            v[k] = at(k);
        return v;
    }
};

enum class GridResolution { Fine, Marginal, TooCoarse };

/// Fine means spacing <= gamma/10 (resolves a comb peak); anything beyond
/// gamma/5 is rejected by the operations that need the lineshape sampled.
inline GridResolution classify_grid_resolution(const FrequencyGrid& grid, double gamma) {
    const double h = grid.spacing();
    if (h > gamma / 5.0)
        return GridResolution::TooCoarse;
    if (h > gamma / 10.0)
        return GridResolution::Marginal;
    return GridResolution::Fine;
}

inline void require_grid_resolves(const FrequencyGrid& grid, double gamma) {
    if (classify_grid_resolution(grid, gamma) == GridResolution::TooCoarse)
        throw numerical_error("grid too coarse: spacing exceeds gamma/5");
}

} // namespace zwmsim
