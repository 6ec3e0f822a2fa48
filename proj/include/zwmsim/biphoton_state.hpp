#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "zwmsim/sample_model.hpp"
#include "zwmsim/spectral_core.hpp"
#include "zwmsim/spectrum.hpp"

namespace zwmsim {

/// Signal-idler product branches of the one-pair sector. The branch
/// signal-1 (x) idler-0 never occurs (the first crystal's idler cannot reach
/// the vacuum port) and is therefore not representable.
enum class Branch { S1I1 = 0, S2I1 = 1, S2I0 = 2 };

/// Discretized one-pair amplitude over (branch, comb index m, offset Omega).
/// A single-cavity state populates only S1I1; the ZWM state carries all
/// three branches. Amplitudes factor as
///   amp(S1I1, m, Omega) = amplitude_scale * Phi_m * L(Omega),
/// with the other branches multiplied by the sample coefficients, which lets
/// amplitude_at() evaluate exactly at any Omega, not just at grid samples.
struct BiphotonState {
    CavityParams params;
    CombIndexRange comb;
    FrequencyGrid offsets; ///< Omega grid, shared by every comb mode
    bool zwm = false;
    double varphi = 0.0;
    std::optional<SampleModel> sample; ///< present iff zwm
    double amplitude_scale = 1.0;      ///< the normalization factor N
    std::array<std::vector<Complex>, 3> amps; ///< [branch][mode * n_offsets + k]

    int n_offsets() const { return offsets.n_points; }
    int n_modes() const { return comb.size(); }
    int mode_index(int m) const { return m - comb.m_min; }

    Complex amp(Branch b, int m, int k) const {
        return amps[static_cast<int>(b)][mode_index(m) * n_offsets() + k];
    }

    /// Energy conservation: the idler partner of signal sample (m, Omega).
    double idler_frequency(int m, double Omega) const {
        return params.omega_i() - m * params.delta_omega - Omega;
    }

    /// Exact (off-grid) amplitude evaluation.
    Complex amplitude_at(Branch b, int m, double Omega) const {
        const Complex base =
            amplitude_scale * phase_mismatch_factor(m, params) * cavity_lineshape(Omega, params.gamma);
        if (b == Branch::S1I1)
            return base;
        if (!zwm)
            return {0.0, 0.0};
        const Complex prop = std::polar(1.0, varphi);
        const double omega_idler = idler_frequency(m, Omega);
        if (b == Branch::S2I1)
            return base * std::conj(transmissivity(*sample, omega_idler)) * prop;
        return base * rear_reflectivity(*sample, omega_idler) * prop;
    }

    /// Trapezoid quadrature weight for offset sample k.
    double quad_weight(int k) const {
        const double h = offsets.spacing();
        return (k == 0 || k == n_offsets() - 1) ? 0.5 * h : h;
    }

    /// Quadrature-weighted squared norm over all branches, modes, offsets.
    double total_norm() const {
        double norm2 = 0.0;
        for (const auto& branch : amps) {
            if (branch.empty())
                continue;
            const int n = n_offsets();
            for (int i = 0; i < static_cast<int>(branch.size()); ++i)
                norm2 += quad_weight(i % n) * std::norm(branch[i]);
        }
        return norm2;
    }
};

/// Signal or idler single-photon spectrum of a biphoton state.
struct MarginalSpectrum {
    enum class Which { Signal, Idler };
    FrequencyGrid grid;
    std::vector<double> values;
    Which which = Which::Signal;
};

/// Single-cavity biphoton state: amplitude N * Phi_m * L(Omega) on branch
/// S1I1, normalized to unit quadrature norm on the truncated grid. The grid
/// must span at least +-25*gamma around zero so the tail truncation stays
/// below the renormalization budget.
inline BiphotonState build_single_cavity_state(const CavityParams& params,
                                               const CombIndexRange& comb,
                                               const FrequencyGrid& offsets) {
    params.validate();
    comb.validate();
    if (offsets.spacing() > params.gamma / 5.0)
        throw numerical_error("biphoton state: offset grid too coarse (spacing > gamma/5)");
    const double min_span = 25.0 * params.gamma * (1.0 - 1e-9);
    if (offsets.start > -min_span || offsets.stop < min_span)
        throw numerical_error("biphoton state: offset grid must span at least +-25*gamma");

    BiphotonState state;
    state.params = params;
    state.comb = comb;
    state.offsets = offsets;
    const int n = offsets.n_points;
    state.amps[0].assign(static_cast<std::size_t>(comb.size()) * n, {0.0, 0.0});

    for (int m = comb.m_min; m <= comb.m_max; ++m) {
        const Complex phi_m = phase_mismatch_factor(m, params);
        for (int k = 0; k < n; ++k)
            state.amps[0][state.mode_index(m) * n + k] =
                phi_m * cavity_lineshape(offsets.at(k), params.gamma);
    }

    const double renorm = 1.0 / std::sqrt(state.total_norm());
    for (auto& a : state.amps[0])
        a *= renorm;
    state.amplitude_scale = renorm;
    return state;
}

/// Sends the idler through the sample and coherently adds the second
/// crystal's pair: per (m, Omega) the branch coefficients are
/// {1, conj(T) e^{i varphi}, R' e^{i varphi}}, then the state is
/// renormalized to unit norm.
inline BiphotonState apply_sample_and_second_crystal(const BiphotonState& input,
                                                     const SampleModel& model, double varphi) {
    if (input.zwm)
        throw numerical_error("biphoton state: input must be a single-cavity state");
    model.validate();

    BiphotonState state = input;
    state.zwm = true;
    state.varphi = varphi;
    state.sample = model;
    const int n = state.n_offsets();
    state.amps[1].assign(state.amps[0].size(), {0.0, 0.0});
    state.amps[2].assign(state.amps[0].size(), {0.0, 0.0});

    const Complex prop = std::polar(1.0, varphi);
    for (int m = state.comb.m_min; m <= state.comb.m_max; ++m) {
        for (int k = 0; k < n; ++k) {
            const std::size_t idx = static_cast<std::size_t>(state.mode_index(m)) * n + k;
            const double omega_idler = state.idler_frequency(m, state.offsets.at(k));
            const Complex base = state.amps[0][idx];
            state.amps[1][idx] = base * std::conj(transmissivity(model, omega_idler)) * prop;
            state.amps[2][idx] = base * rear_reflectivity(model, omega_idler) * prop;
        }
    }

    const double renorm = 1.0 / std::sqrt(state.total_norm());
    for (auto& branch : state.amps)
        for (auto& a : branch)
            a *= renorm;
    state.amplitude_scale *= renorm;
    return state;
}

/// Branch-summed single-photon spectrum. The idler marginal mirrors the
/// signal one at omega_p - omega by construction.
inline MarginalSpectrum marginal_spectrum(const BiphotonState& state,
                                          MarginalSpectrum::Which which,
                                          const FrequencyGrid& grid) {
    require_grid_resolves(grid, state.params.gamma);
    MarginalSpectrum out;
    out.grid = grid;
    out.which = which;
    out.values.resize(grid.n_points);
    const CavityParams& p = state.params;
    for (int i = 0; i < grid.n_points; ++i) {
        const double omega = grid.at(i);
        double v = 0.0;
        for (int m = state.comb.m_min; m <= state.comb.m_max; ++m) {
            const double offset = (which == MarginalSpectrum::Which::Signal)
                                      ? omega - p.omega_s - m * p.delta_omega
                                      : p.omega_i() - m * p.delta_omega - omega;
            v += std::norm(state.amplitude_at(Branch::S1I1, m, offset));
            if (state.zwm) {
                v += std::norm(state.amplitude_at(Branch::S2I1, m, offset));
                v += std::norm(state.amplitude_at(Branch::S2I0, m, offset));
            }
        }
        out.values[i] = v;
    }
    return out;
}

/// Brute-force detection spectrum built directly from the state amplitudes:
/// at each detected omega the m-sum of signal-1 and phase-shifted signal-2
/// amplitudes sharing the idler-1 partner at omega_p - omega is squared.
/// Scaled by 1/N^2 so it is directly comparable with the closed-form
/// spectrum evaluations.
inline Spectrum correlation_spectrum_oracle(const BiphotonState& state, double phi,
                                            const FrequencyGrid& grid) {
    if (!state.zwm)
        throw numerical_error("oracle: state must be a ZWM state");
    Spectrum out;
    out.grid = grid;
    out.fidelity = Fidelity::Oracle;
    out.phi = phi;
    out.varphi = state.varphi;
    out.values.resize(grid.n_points);
    const CavityParams& p = state.params;
    const Complex eiphi = std::polar(1.0, phi);
    const double inv_scale2 = 1.0 / (state.amplitude_scale * state.amplitude_scale);
    for (int i = 0; i < grid.n_points; ++i) {
        const double omega = grid.at(i);
        Complex c{0.0, 0.0};
        for (int m = state.comb.m_min; m <= state.comb.m_max; ++m) {
            const double offset = omega - p.omega_s - m * p.delta_omega;
            c += state.amplitude_at(Branch::S1I1, m, offset) +
                 eiphi * state.amplitude_at(Branch::S2I1, m, offset);
        }
        out.values[i] = std::norm(c) * inv_scale2;
    }
    return out;
}

} // namespace zwmsim
