#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "zwmsim/detail/linalg.hpp"
#include "zwmsim/parallel.hpp"
#include "zwmsim/sample_model.hpp"
#include "zwmsim/spectral_core.hpp"
#include "zwmsim/spectrum.hpp"

namespace zwmsim {

/// Interference bracket 1 + |T|^2 + 2 Re(conj(T) e^{i theta}). For real
/// non-negative T this is the textbook 1 + |T|^2 + 2|T| cos(theta);
/// paper_exact discards the phase of T and uses |T| in the cross term.
inline double interference_bracket(Complex t, double theta, bool paper_exact = false) {
    const double cross = paper_exact
                             ? std::abs(t) * std::cos(theta)
                             : std::real(std::conj(t) * std::polar(1.0, theta));
    return 1.0 + std::norm(t) + 2.0 * cross;
}

/// Per-comb-mode visibility and its inversion back to |T|.
struct VisibilityRow {
    int m = 0;
    double omega_signal = 0.0;
    double omega_idler = 0.0;
    double visibility = 0.0;
    double t_hat = 0.0; ///< invert_visibility(visibility), self-consistency column
};

struct VisibilityTable {
    std::vector<VisibilityRow> rows;
};

namespace detail {

inline void check_spectrum_inputs(const CavityParams& params, const SampleModel& model,
                                  const CombIndexRange& comb, const FrequencyGrid& grid) {
    params.validate();
    model.validate();
    comb.validate();
    require_grid_resolves(grid, params.gamma);
}

/// Reduce the total interference phase once so S is exactly 2*pi periodic
/// up to the representation error of the inputs.
inline double total_phase(double phi, double varphi) {
    return std::remainder(phi + varphi, 2.0 * kPi);
}

} // namespace detail

///// Full double-sum spectrum: over (m', m), sinc*sinc*e^{i(m'-m)dw tau/2}
/// times the product of cavity resonance denominators, times the
/// interference bracket at T(omega_p - omega). The real part is returned;
/// the largest imaginary residual is recorded as a diagnostic.
inline Spectrum compute_spectrum_full(const CavityParams& params, const SampleModel& model,
                                      const CombIndexRange& comb, double phi, double varphi,
                                      const FrequencyGrid& grid, bool paper_exact = false) {
    detail::check_spectrum_inputs(params, model, comb, grid);
    Spectrum out;
    out.grid = grid;
    out.fidelity = Fidelity::Full;
    out.phi = phi;
    out.varphi = varphi;
    out.values.resize(grid.n_points);

    const double theta = detail::total_phase(phi, varphi);
    const int n_modes = comb.size();
    std::vector<Complex> phi_m(n_modes);
    for (int m = comb.m_min; m <= comb.m_max; ++m)
        phi_m[m - comb.m_min] = phase_mismatch_factor(m, params);

    std::vector<double> residual(grid.n_points, 0.0);
    parallel_for(grid.n_points, [&](int i) {
        const double omega = grid.at(i);
        std::vector<Complex> term(n_modes);
        for (int j = 0; j < n_modes; ++j) {
            const double offset = omega - params.omega_s - (comb.m_min + j) * params.delta_omega;
            term[j] = phi_m[j] * cavity_lineshape(offset, params.gamma);
        }
        Complex acc{0.0, 0.0};
        for (int jp = 0; jp < n_modes; ++jp)
            for (int j = 0; j < n_modes; ++j)
                acc += std::conj(term[jp]) * term[j];
        acc *= interference_bracket(transmissivity(model, params.omega_p - omega), theta,
                                    paper_exact);
        residual[i] = std::abs(acc.imag());
        out.values[i] = std::max(0.0, acc.real());
    });
    for (double r : residual)
        out.residual_imag = std::max(out.residual_imag, r);
    return out;
}

/// Good-cavity approximation: diagonal single sum of
/// sinc^2 * gamma/((gamma/2)^2 + offset^2) * bracket(omega).
inline Spectrum compute_spectrum_good_cavity(const CavityParams& params, const SampleModel& model,
                                             const CombIndexRange& comb, double phi, double varphi,
                                             const FrequencyGrid& grid, bool paper_exact = false) {
    detail::check_spectrum_inputs(params, model, comb, grid);
    Spectrum out;
    out.grid = grid;
    out.fidelity = Fidelity::GoodCavity;
    out.phi = phi;
    out.varphi = varphi;
    out.values.resize(grid.n_points);
    if (params.gamma / params.delta_omega > 0.1)
        out.warnings.push_back("good-cavity approximation used with gamma/delta_omega > 0.1");

    const double theta = detail::total_phase(phi, varphi);
    const double half = 0.5 * params.gamma;
    parallel_for(grid.n_points, [&](int i) {
        const double omega = grid.at(i);
        double kernel = 0.0;
        for (int m = comb.m_min; m <= comb.m_max; ++m) {
            const double offset = omega - params.omega_s - m * params.delta_omega;
            const double s = sinc(0.5 * m * params.delta_omega * params.tau);
            kernel += s * s * params.gamma / (half * half + offset * offset);
        }
        out.values[i] = kernel * interference_bracket(
                                     transmissivity(model, params.omega_p - omega), theta,
                                     paper_exact);
    });
    return out;
}

/// Comb-resolved form: the bracket is frozen per mode at the comb-center
/// idler frequency omega_i - m*delta_omega.
inline Spectrum compute_spectrum_comb_resolved(const CavityParams& params, const SampleModel& model,
                                               const CombIndexRange& comb, double phi, double varphi,
                                               const FrequencyGrid& grid, bool paper_exact = false) {
    detail::check_spectrum_inputs(params, model, comb, grid);
    Spectrum out;
    out.grid = grid;
    out.fidelity = Fidelity::CombResolved;
    out.phi = phi;
    out.varphi = varphi;
    out.values.resize(grid.n_points);
    if (params.gamma / params.delta_omega > 0.1)
        out.warnings.push_back("good-cavity approximation used with gamma/delta_omega > 0.1");

    const double theta = detail::total_phase(phi, varphi);
    const double half = 0.5 * params.gamma;
    const int n_modes = comb.size();
    std::vector<double> weight(n_modes);
    for (int m = comb.m_min; m <= comb.m_max; ++m) {
        const double s = sinc(0.5 * m * params.delta_omega * params.tau);
        const Complex t = transmissivity(model, params.omega_i() - m * params.delta_omega);
        weight[m - comb.m_min] = s * s * interference_bracket(t, theta, paper_exact);
    }
    parallel_for(grid.n_points, [&](int i) {
        const double omega = grid.at(i);
        double v = 0.0;
        for (int j = 0; j < n_modes; ++j) {
            const double offset = omega - params.omega_s - (comb.m_min + j) * params.delta_omega;
            v += weight[j] * params.gamma / (half * half + offset * offset);
        }
        out.values[i] = v;
    });
    return out;
}

/// Single-frequency evaluation of the full double sum (real part).
inline double spectrum_point_full(const CavityParams& params, const SampleModel& model,
                                  const CombIndexRange& comb, double phi, double varphi,
                                  double omega, bool paper_exact = false) {
    const double theta = detail::total_phase(phi, varphi);
    const int n_modes = comb.size();
    std::vector<Complex> term(n_modes);
    for (int m = comb.m_min; m <= comb.m_max; ++m) {
        const double offset = omega - params.omega_s - m * params.delta_omega;
        term[m - comb.m_min] =
            phase_mismatch_factor(m, params) * cavity_lineshape(offset, params.gamma);
    }
    Complex acc{0.0, 0.0};
    for (int jp = 0; jp < n_modes; ++jp)
        for (int j = 0; j < n_modes; ++j)
            acc += std::conj(term[jp]) * term[j];
    acc *= interference_bracket(transmissivity(model, params.omega_p - omega), theta, paper_exact);
    return std::max(0.0, acc.real());
}

/// Single-frequency evaluation of the good-cavity single sum.
inline double spectrum_point_good_cavity(const CavityParams& params, const SampleModel& model,
                                         const CombIndexRange& comb, double phi, double varphi,
                                         double omega, bool paper_exact = false) {
    const double theta = detail::total_phase(phi, varphi);
    const double half = 0.5 * params.gamma;
    double kernel = 0.0;
    for (int m = comb.m_min; m <= comb.m_max; ++m) {
        const double offset = omega - params.omega_s - m * params.delta_omega;
        const double s = sinc(0.5 * m * params.delta_omega * params.tau);
        kernel += s * s * params.gamma / (half * half + offset * offset);
    }
    return kernel *
           interference_bracket(transmissivity(model, params.omega_p - omega), theta, paper_exact);
}

/// Comb-peak signal frequencies omega_s + m*delta_omega for the retained
/// modes. Peak readout happens at exactly these frequencies.
inline std::vector<double> comb_peak_frequencies(const CavityParams& params,
                                                 const CombIndexRange& comb) {
    std::vector<double> peaks;
    peaks.reserve(comb.size());
    for (int m = comb.m_min; m <= comb.m_max; ++m)
        peaks.push_back(params.omega_s + m * params.delta_omega);
    return peaks;
}

/// |T| from a measured visibility: the |T| <= 1 root of V t^2 - 2t + V = 0,
/// t = (1 - sqrt(1 - V^2)) / V, with a series form near V = 0.
inline double invert_visibility(double v) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::domain_error("invert_visibility: V must lie in [0, 1]");
    if (v < 1e-6)
        return 0.5 * v * (1.0 + 0.25 * v * v);
    return (1.0 - std::sqrt((1.0 - v) * (1.0 + v))) / v;
}

/// Per-mode visibility V_m = 2|T| / (1 + |T|^2) at the comb-center idler
/// frequency, with the inverted |T| estimate alongside.
inline VisibilityTable visibility(const CavityParams& params, const SampleModel& model,
                                  const CombIndexRange& comb) {
    params.validate();
    model.validate();
    comb.validate();
    VisibilityTable table;
    table.rows.reserve(comb.size());
    for (int m = comb.m_min; m <= comb.m_max; ++m) {
        VisibilityRow row;
        row.m = m;
        row.omega_signal = params.omega_s + m * params.delta_omega;
        row.omega_idler = params.omega_i() - m * params.delta_omega;
        const double t = std::abs(transmissivity(model, row.omega_idler));
        row.visibility = 2.0 * t / (1.0 + t * t);
        row.t_hat = invert_visibility(row.visibility);
        table.rows.push_back(row);
    }
    return table;
}

/// Least-squares fit of S_peak(phi) = a + b cos(phi + c); returns b/a.
/// Needs at least three distinct phases and a positive mean level.
inline double fringe_visibility_from_phase_sweep(
    const std::vector<std::pair<double, double>>& peak_values) {
    std::vector<double> distinct;
    for (const auto& [phase, value] : peak_values) {
        (void)value;
        bool seen = false;
        for (double d : distinct)
            seen = seen || d == phase;
        if (!seen)
            distinct.push_back(phase);
    }
    if (distinct.size() < 3)
        throw numerical_error("phase sweep fit: need at least 3 distinct phases");

    detail::Mat3 ata{};
    detail::Vec3 atb{};
    for (const auto& [phase, value] : peak_values) {
        const detail::Vec3 x{1.0, std::cos(phase), std::sin(phase)};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c)
                ata[r * 3 + c] += x[r] * x[c];
            atb[r] += x[r] * value;
        }
    }
    const detail::Vec3 beta = detail::mul3(detail::invert3(ata), atb);
    const double a = beta[0];
    const double b = std::hypot(beta[1], beta[2]);
    if (a <= 0.0)
        throw numerical_error("phase sweep fit: degenerate fit, non-positive mean level");
    return b / a;
}

} // namespace zwmsim
