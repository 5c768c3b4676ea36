// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string_view>
#include <vector>

#include "doalab/fastgrid.hpp"
#include "doalab/linalg.hpp"

namespace doalab {

/// R = Y Y^H / L over the L columns of Y, symmetrized.
inline ComplexMatrix sample_covariance(const ComplexMatrix& y) {
    if (y.cols() < 1)
        throw DimensionError("sample_covariance: Y needs at least one column");
    ComplexMatrix r = ComplexMatrix::Zero(y.rows(), y.rows());
    r.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / static_cast<double>(y.cols()));
    r.triangularView<Eigen::StrictlyUpper>() = r.adjoint();
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        r(i, i) = Complex(r(i, i).real(), 0.0);
    return r;
}

struct SubspaceDecomposition {
    ComplexMatrix signal;  // S, M x K
    ComplexMatrix noise;   // G, M x (M - K)
    RealVector lambda_s;
    RealVector lambda_n;
    ComplexMatrix sqrt_r;  // [S sqrt(Ls) | G sqrt(Ln)]

    std::size_t antennas() const { return static_cast<std::size_t>(signal.rows()); }
    std::size_t order() const { return static_cast<std::size_t>(signal.cols()); }
};

inline SubspaceDecomposition partition(const HermitianEvd& evd, std::size_t k) {
    const auto m = evd.eigenvalues.size();
    const auto kk = static_cast<Eigen::Index>(k);
    if (k < 1 || kk >= m)
        throw ContractError("partition: need 1 <= K < M");
    SubspaceDecomposition dec;
    dec.signal = evd.eigenvectors.leftCols(kk);
    dec.noise = evd.eigenvectors.rightCols(m - kk);
    dec.lambda_s = evd.eigenvalues.head(kk);
    dec.lambda_n = evd.eigenvalues.tail(m - kk);
    dec.sqrt_r = covariance_sqrt(evd);
    return dec;
}

inline SubspaceDecomposition partition(const ComplexMatrix& r, std::size_t k) {
    if (r.rows() != r.cols())
        throw DimensionError("partition: R must be square");
    if (k < 1 || static_cast<Eigen::Index>(k) >= r.rows())
        throw ContractError("partition: need 1 <= K < M");
    return partition(hermitian_evd(r), k);
}

/// Scales column i of `basis` by sqrt(max(lambda_i, floor)).
inline ComplexMatrix weight_columns(const ComplexMatrix& basis, const RealVector& lambda, double floor = 0.0) {
    ComplexMatrix out = basis;
    for (Eigen::Index i = 0; i < out.cols(); ++i)
        out.col(i) *= std::sqrt(std::max(lambda(i), floor));
    return out;
}

// Relative eigenvalue floor for the weighted noise form; without it a
// noiseless covariance (all lambda_n = 0) saturates every grid point.
inline constexpr double kNoiseWeightFloor = 1e-12;

enum class MusicVariant { MusicNoise, MusicSignal, WmusicNoise, WmusicSignal };

inline std::string_view to_string(MusicVariant v) {
    switch (v) {
    case MusicVariant::MusicNoise: return "music-noise";
    case MusicVariant::MusicSignal: return "music-signal";
    case MusicVariant::WmusicNoise: return "wmusic-noise";
    case MusicVariant::WmusicSignal: return "wmusic-signal";
    }
    return "?";
}

/// Signal form when K <= M - K, noise form otherwise.
inline MusicVariant default_music_variant(std::size_t k, std::size_t m) {
    return k <= m - k ? MusicVariant::MusicSignal : MusicVariant::MusicNoise;
}

inline Pseudospectrum pseudospectrum(const SubspaceDecomposition& dec, const GridEvaluator& ge,
                                     MusicVariant variant, Evaluator ev) {
    if (dec.antennas() != ge.antennas())
        throw DimensionError("pseudospectrum: decomposition and grid disagree on M");
    ObjectiveOperands ops;
    ComplexMatrix weighted;
    switch (variant) {
    case MusicVariant::MusicSignal:
        ops.numerator = &dec.signal;
        ops.form = ObjectiveForm::Norm;
        break;
    case MusicVariant::MusicNoise:
        ops.numerator = &dec.noise;
        ops.form = ObjectiveForm::InverseNorm;
        break;
    case MusicVariant::WmusicSignal:
        weighted = weight_columns(dec.signal, dec.lambda_s);
        ops.numerator = &weighted;
        ops.form = ObjectiveForm::Norm;
        break;
    case MusicVariant::WmusicNoise: {
        const double lmax = dec.lambda_s.size() > 0 ? std::max(dec.lambda_s(0), 0.0) : 0.0;
        // weights over their max: a constant factor, so peaks are unchanged, but the
        // saturation value then always dominates the unsaturated ones
        RealVector w = dec.lambda_n.cwiseMax(kNoiseWeightFloor * lmax);
        if (w.size() > 0 && w.maxCoeff() > 0.0)
            w /= w.maxCoeff();
        weighted = weight_columns(dec.noise, w);
        ops.numerator = &weighted;
        ops.form = ObjectiveForm::InverseNorm;
        break;
    }
    }
    return evaluate_objective(ge, ops, ev);
}

/**
 * Indices of the K largest strict local maxima, sorted by descending value
 * with ties broken by the lower index. Endpoints only compare against their
 * single neighbour. When fewer than K peaks exist the remainder is filled with
 * the largest non-peak values.
 */
inline std::vector<std::size_t> select_peaks(std::span<const double> values, std::size_t k) {
    const std::size_t n = values.size();
    std::vector<std::size_t> peaks;
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || values[i] > values[i - 1];
        const bool right_ok = i + 1 == n || values[i] > values[i + 1];
        (left_ok && right_ok && n > 1 ? peaks : others).push_back(i);
    }
    auto by_value = [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b])
            return values[a] > values[b];
        return a < b;
    };
    const std::size_t take = std::min(k, peaks.size());
    std::partial_sort(peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(take), peaks.end(), by_value);
    peaks.resize(take);
    if (peaks.size() < k) {
        const std::size_t fill = std::min(k - peaks.size(), others.size());
        std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(fill), others.end(), by_value);
        peaks.insert(peaks.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(fill));
    }
    return peaks;
}

inline DoaEstimate select_peaks(const Pseudospectrum& ps, std::size_t k) {
    DoaEstimate est;
    for (auto idx : select_peaks(std::span<const double>(ps.values), k))
        est.push(*ps.grid, idx);
    return est;
}

/// MUSIC / WMUSIC on a sample covariance: one EVD, one pseudospectrum, K peaks.
inline DoaEstimate music_estimate(const ComplexMatrix& r, std::size_t k, MusicVariant variant,
                                  const GridEvaluator& ge, Evaluator ev) {
    const auto dec = partition(r, k);
    return select_peaks(pseudospectrum(dec, ge, variant, ev), k);
}

} // namespace doalab
