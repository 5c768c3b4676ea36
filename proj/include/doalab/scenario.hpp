// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "doalab/linalg.hpp"

namespace doalab {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Radar and array parameters for one Monte Carlo scenario.
struct ScenarioConfig {
    std::size_t targets = 8;      // K
    std::size_t antennas = 16;    // M
    std::size_t subcarriers = 512; // Q
    std::size_t symbols = 10;     // D
    double snr_db = 40.0;         // +inf gives a noiseless observation
    double carrier_freq_hz = 5e9;
    double subcarrier_spacing_hz = 78125.0;
    double max_range_m = 60.0;
    std::size_t grid_points = 2048; // N
    double element_phase_factor = std::numbers::pi; // k_c * spacing, rad per element
    std::uint64_t seed = 1;

    std::size_t snapshots() const { return subcarriers * symbols; }
    double symbol_period_s() const { return 1.0 / subcarrier_spacing_hz; }

    void validate() const {
        if (targets < 1)
            throw ConfigError("targets must be >= 1");
        if (antennas < 2)
            throw ConfigError("antennas must be >= 2");
        if (targets >= antennas)
            throw ConfigError("targets must be < antennas");
        if (subcarriers < 1 || symbols < 1)
            throw ConfigError("subcarriers and symbols must be >= 1");
        if (grid_points < 2 * antennas)
            throw ConfigError("grid_points must be >= 2 * antennas");
        if ((grid_points & (grid_points - 1)) != 0)
            throw ConfigError("grid_points must be a power of two");
        if (!(max_range_m > 5.0))
            throw ConfigError("max_range_m must exceed 5 m");
        if (!(subcarrier_spacing_hz > 0.0) || !(carrier_freq_hz > 0.0))
            throw ConfigError("frequencies must be positive");
        if (std::isnan(snr_db))
            throw ConfigError("snr_db must not be NaN");
    }
};

/// True target set of one trial. Angles are u = sin(theta).
struct GroundTruth {
    std::vector<double> doas;
    std::vector<double> delays_s;
    std::vector<double> dopplers_hz;
    std::vector<Complex> amplitudes;
    double noise_variance = 0.0;

    std::size_t size() const { return doas.size(); }
};

struct Observation {
    ComplexMatrix y;      // M x DQ
    ComplexMatrix coeffs; // K x DQ, modulated channel coefficients
    ComplexMatrix noise;  // M x DQ
    GroundTruth truth;
};

using Rng = std::mt19937_64;

/// Independent per-trial stream; adding trials never perturbs earlier ones.
inline Rng trial_stream(std::uint64_t seed, std::uint64_t trial_index) {
    return Rng(seed ^ (trial_index * 0x9E3779B97F4A7C15ULL));
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Noise variance that makes mean(|alpha|^2) / sigma^2 equal the SNR.
inline double noise_variance_for(std::span<const Complex> amplitudes, double snr_db) {
    if (amplitudes.empty())
        throw ContractError("noise_variance_for: no amplitudes");
    if (std::isinf(snr_db) && snr_db > 0)
        return 0.0;
    double power = 0.0;
    for (auto a : amplitudes)
        power += std::norm(a);
    power /= static_cast<double>(amplitudes.size());
    return power / db_to_linear(snr_db);
}

inline ComplexVector steering_vector(double u, std::size_t m, double phase_factor) {
    if (!(std::abs(u) <= 1.0))
        throw DomainError("steering_vector: |u| must be <= 1");
    ComplexVector a(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
        a(static_cast<Eigen::Index>(i)) = std::polar(1.0, phase_factor * u * static_cast<double>(i));
    return a;
}

inline ComplexMatrix steering_matrix(std::span<const double> us, std::size_t m, double phase_factor) {
    ComplexMatrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(us.size()));
    for (std::size_t k = 0; k < us.size(); ++k)
        a.col(static_cast<Eigen::Index>(k)) = steering_vector(us[k], m, phase_factor);
    return a;
}

/**
 * Random target set: angles uniform on [-1, 1) with a minimum pairwise gap of
 * 2/N (rejection sampled), ranges uniform on [5 m, max_range], two-way delays,
 * Dopplers uniform within +-1/(4 D T), |alpha| = (20 m / range)^2 with
 * uniform phase, and the noise variance solved from the configured SNR.
 */
inline GroundTruth draw_targets(const ScenarioConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t k = cfg.targets;
    const double min_gap = 2.0 / static_cast<double>(cfg.grid_points);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    GroundTruth truth;
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
        truth.doas.clear();
        for (std::size_t i = 0; i < k; ++i)
            truth.doas.push_back(unit(rng));
        ok = true;
        for (std::size_t i = 0; i < k && ok; ++i)
            for (std::size_t j = i + 1; j < k && ok; ++j)
                if (std::abs(truth.doas[i] - truth.doas[j]) < min_gap)
                    ok = false;
    }
    if (!ok)
        throw ConfigError("draw_targets: could not place targets with the required angular gap");

    constexpr double kRangeRef = 20.0;
    const double fd_max = 1.0 / (4.0 * static_cast<double>(cfg.symbols) * cfg.symbol_period_s());
    std::uniform_real_distribution<double> range_dist(5.0, cfg.max_range_m);
    std::uniform_real_distribution<double> doppler_dist(-fd_max, fd_max);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < k; ++i) {
        const double range = range_dist(rng);
        truth.delays_s.push_back(2.0 * range / kSpeedOfLight);
        truth.dopplers_hz.push_back(doppler_dist(rng));
        const double mag = (kRangeRef / range) * (kRangeRef / range);
        truth.amplitudes.push_back(std::polar(mag, phase_dist(rng)));
    }
    truth.noise_variance = noise_variance_for(truth.amplitudes, cfg.snr_db);
    return truth;
}

/// Y = A(u) B' + noise, with unit-modulus random-phase data symbols.
inline Observation synthesize_observation(const GroundTruth& truth, const ScenarioConfig& cfg, Rng& rng) {
    const auto k = static_cast<Eigen::Index>(truth.size());
    const auto m = static_cast<Eigen::Index>(cfg.antennas);
    const std::size_t q_count = cfg.subcarriers;
    const std::size_t d_count = cfg.symbols;
    const auto snapshots = static_cast<Eigen::Index>(cfg.snapshots());
    const double tsym = cfg.symbol_period_s();
    constexpr double two_pi = 2.0 * std::numbers::pi;

    Observation obs;
    obs.truth = truth;
    obs.coeffs.resize(k, snapshots);

    std::uniform_real_distribution<double> phase_dist(0.0, two_pi);
    for (std::size_t d = 0; d < d_count; ++d) {
        for (std::size_t q = 0; q < q_count; ++q) {
            const Complex symbol = std::polar(1.0, phase_dist(rng));
            const auto col = static_cast<Eigen::Index>(d * q_count + q);
            for (Eigen::Index t = 0; t < k; ++t) {
                const auto ti = static_cast<std::size_t>(t);
                const double tau = truth.delays_s[ti];
                const double phase = -two_pi * cfg.carrier_freq_hz * tau
                                     - two_pi * cfg.subcarrier_spacing_hz * tau * static_cast<double>(q)
                                     + two_pi * truth.dopplers_hz[ti] * static_cast<double>(d) * tsym;
                obs.coeffs(t, col) = truth.amplitudes[ti] * std::polar(1.0, phase) * symbol;
            }
        }
    }

    obs.noise = ComplexMatrix::Zero(m, snapshots);
    if (truth.noise_variance > 0.0) {
        std::normal_distribution<double> gauss(0.0, std::sqrt(truth.noise_variance / 2.0));
        for (Eigen::Index c = 0; c < snapshots; ++c)
            for (Eigen::Index r = 0; r < m; ++r) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                obs.noise(r, c) = Complex(re, im);
            }
    }

    const ComplexMatrix a = steering_matrix(truth.doas, cfg.antennas, cfg.element_phase_factor);
    obs.y = a * obs.coeffs + obs.noise;
    return obs;
}

} // namespace doalab
