#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "zwmsim/detail/linalg.hpp"
#include "zwmsim/zwm_spectrum.hpp"

namespace zwmsim {

/// Comb-resolving spectrometer: Gaussian instrument response plus a uniform
/// bin grid.
struct SpectrometerModel {
    double resolution_sigma = 0.0;
    std::vector<double> bin_edges;

    static SpectrometerModel uniform(double start, double stop, int n_bins, double sigma) {
        if (n_bins < 1 || !(stop > start))
            throw numerical_error("spectrometer: requires stop > start and n_bins >= 1");
        if (sigma < 0.0)
            throw numerical_error("spectrometer: resolution_sigma must be non-negative");
        SpectrometerModel s;
        s.resolution_sigma = sigma;
        s.bin_edges.resize(n_bins + 1);
        for (int i = 0; i <= n_bins; ++i)
            s.bin_edges[i] = start + (stop - start) * i / n_bins;
        return s;
    }

    int n_bins() const { return static_cast<int>(bin_edges.size()) - 1; }
    double bin_center(int i) const { return 0.5 * (bin_edges[i] + bin_edges[i + 1]); }

    /// Comb teeth stay separable while sigma < delta_omega / 4.
    bool comb_resolving(double delta_omega) const {
        return resolution_sigma < delta_omega / 4.0;
    }
};

/// One phase-sweep measurement: per-(phase, bin) photon counts plus the comb
/// geometry needed to map bins back to mode indices.
struct MeasurementRun {
    std::uint64_t seed = 0;
    long long n_photons_per_phase = 0;
    std::vector<double> phases;
    std::vector<std::vector<long long>> counts; ///< [phase][bin]
    SpectrometerModel spectrometer;
    double omega_s = 0.0;
    double delta_omega = 0.0;
};

struct VisibilityEstimate {
    double visibility = 0.0;
    double std_err = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Substream key derivation: hash the run seed, mix in the 1-based stream
/// index, hash again. Streams are independent of execution order.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (stream + 1));
}

/// Draws n photon frequencies from the normalized spectrum by inverse-CDF
/// sampling on the grid (piecewise-uniform within cells), applies Gaussian
/// resolution jitter, and bins them. Out-of-range photons are clamped into
/// the edge bins so counts always sum to n. Deterministic given the seed.
inline std::vector<long long> sample_photons(const Spectrum& spectrum,
                                             const SpectrometerModel& spectrometer,
                                             long long n, std::uint64_t seed) {
    const int n_cells = spectrum.grid.n_points - 1;
    std::vector<double> cdf(n_cells + 1, 0.0);
    for (int k = 0; k < n_cells; ++k) {
        const double p = 0.5 * (spectrum.values[k] + spectrum.values[k + 1]);
        if (p < 0.0)
            throw numerical_error("sample_photons: negative spectrum value");
        cdf[k + 1] = cdf[k] + p;
    }
    const double total = cdf.back();
    if (!(total > 0.0))
        throw numerical_error("sample_photons: cannot normalize an all-zero spectrum");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 1.0);
    const double lo = spectrometer.bin_edges.front();
    const double hi = spectrometer.bin_edges.back();

    std::vector<long long> counts(spectrometer.n_bins(), 0);
    for (long long i = 0; i < n; ++i) {
        const double u = uniform(rng) * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        int cell = static_cast<int>(it - cdf.begin()) - 1;
        cell = std::clamp(cell, 0, n_cells - 1);
        const double width = cdf[cell + 1] - cdf[cell];
        const double frac = width > 0.0 ? (u - cdf[cell]) / width : 0.5;
        double omega = spectrum.grid.at(cell) + frac * spectrum.grid.spacing();
        if (spectrometer.resolution_sigma > 0.0)
            omega += spectrometer.resolution_sigma * jitter(rng);
        omega = std::clamp(omega, lo, std::nextafter(hi, lo));
        const auto bin_it =
            std::upper_bound(spectrometer.bin_edges.begin(), spectrometer.bin_edges.end(), omega);
        int bin = static_cast<int>(bin_it - spectrometer.bin_edges.begin()) - 1;
        bin = std::clamp(bin, 0, spectrometer.n_bins() - 1);
        ++counts[bin];
    }
    return counts;
}

/// Simulates the full sweep: a comb-resolved spectrum per phase, sampled
/// with per-phase RNG substreams. The detected photon number tracks the
/// total spectrum intensity: the brightest phase of the sweep detects
/// n_per_phase photons and every other phase a proportional share, so
/// interference suppresses counts instead of being normalized away.
inline MeasurementRun run_phase_sweep(const CavityParams& params, const SampleModel& model,
                                      const CombIndexRange& comb, double varphi,
                                      const std::vector<double>& phases,
                                      const SpectrometerModel& spectrometer,
                                      long long n_per_phase, std::uint64_t seed,
                                      bool paper_exact = false) {
    if (phases.empty())
        throw numerical_error("phase sweep: needs at least one phase");
    const double span = spectrometer.bin_edges.back() - spectrometer.bin_edges.front();
    const int n_points =
        std::max(512, static_cast<int>(std::ceil(span / (params.gamma / 10.0))) + 1);
    const auto grid =
        FrequencyGrid::linspace(spectrometer.bin_edges.front(), spectrometer.bin_edges.back(),
                                n_points);

    std::vector<Spectrum> spectra;
    spectra.reserve(phases.size());
    std::vector<double> intensity(phases.size(), 0.0);
    double max_intensity = 0.0;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        spectra.push_back(compute_spectrum_comb_resolved(params, model, comb, phases[i], varphi,
                                                         grid, paper_exact));
        const double h = grid.spacing();
        for (int k = 0; k + 1 < grid.n_points; ++k)
            intensity[i] += 0.5 * h * (spectra.back().values[k] + spectra.back().values[k + 1]);
        max_intensity = std::max(max_intensity, intensity[i]);
    }
    if (!(max_intensity > 0.0))
        throw numerical_error("phase sweep: spectrum vanishes at every phase");

    MeasurementRun run;
    run.seed = seed;
    run.n_photons_per_phase = n_per_phase;
    run.phases = phases;
    run.spectrometer = spectrometer;
    run.omega_s = params.omega_s;
    run.delta_omega = params.delta_omega;
    run.counts.reserve(phases.size());
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const long long n_detected = static_cast<long long>(
            std::llround(static_cast<double>(n_per_phase) * intensity[i] / max_intensity));
        if (n_detected > 0)
            run.counts.push_back(sample_photons(spectra[i], spectrometer, n_detected,
                                                substream_seed(seed, i)));
        else
            run.counts.push_back(std::vector<long long>(spectrometer.n_bins(), 0));
    }
    return run;
}

/// Bins whose centers lie within delta_omega/2 of omega_s + m*delta_omega.
inline std::vector<int> mode_bins(const MeasurementRun& run, int m) {
    const double center = run.omega_s + m * run.delta_omega;
    std::vector<int> bins;
    for (int i = 0; i < run.spectrometer.n_bins(); ++i)
        if (std::abs(run.spectrometer.bin_center(i) - center) <= 0.5 * run.delta_omega)
            bins.push_back(i);
    return bins;
}

/// Poisson-weighted cosine fit of the per-phase counts in the mode-m bin;
/// returns the visibility estimate and its standard error from the fit
/// covariance.
inline VisibilityEstimate estimate_visibility(const MeasurementRun& run, int m) {
    if (run.phases.size() < 3)
        throw numerical_error("estimate_visibility: needs at least 3 phases");
    const auto bins = mode_bins(run, m);
    if (bins.empty())
        throw numerical_error("estimate_visibility: no spectrometer bin covers the mode");

    std::vector<double> y(run.phases.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < run.phases.size(); ++i) {
        for (int b : bins)
            y[i] += static_cast<double>(run.counts[i][b]);
        total += y[i];
    }
    if (total < 100.0)
        throw low_statistics_error("estimate_visibility: fewer than 100 counts in mode bin");

    detail::Mat3 ata{};
    detail::Vec3 atb{};
    for (std::size_t i = 0; i < run.phases.size(); ++i) {
        const double w = 1.0 / std::max(y[i], 1.0); // Poisson variance
        const detail::Vec3 x{1.0, std::cos(run.phases[i]), std::sin(run.phases[i])};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c)
                ata[r * 3 + c] += w * x[r] * x[c];
            atb[r] += w * x[r] * y[i];
        }
    }
    const detail::Mat3 cov = detail::invert3(ata);
    const detail::Vec3 beta = detail::mul3(cov, atb);
    const double a = beta[0];
    const double b = std::hypot(beta[1], beta[2]);
    if (a <= 0.0)
        throw numerical_error("estimate_visibility: degenerate fit, non-positive mean level");

    VisibilityEstimate est;
    est.visibility = b / a;
    detail::Vec3 g;
    if (b > 1e-300 * a) {
        g = {-b / (a * a), beta[1] / (b * a), beta[2] / (b * a)};
    } else {
        est.visibility = 0.0;
        g = {0.0, 1.0 / a, 1.0 / a};
    }
    double var = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            var += g[r] * cov[r * 3 + c] * g[c];
    est.std_err = std::sqrt(std::max(0.0, var));
    return est;
}

} // namespace zwmsim
