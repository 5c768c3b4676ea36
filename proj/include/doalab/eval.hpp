// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "doalab/linalg.hpp"
#include "doalab/scenario.hpp"

namespace doalab {

struct AssociationPair {
    std::size_t truth;
    std::size_t estimate;
    double gap; // |delta u|
};

struct AssociationResult {
    std::vector<AssociationPair> pairs; // sorted by truth index
    std::vector<std::size_t> unmatched_true;
    std::vector<std::size_t> unmatched_est;

    double total_cost() const {
        double c = 0.0;
        for (const auto& p : pairs)
            c += p.gap;
        return c;
    }
};

namespace detail {

// Minimum-cost assignment of every row to a distinct column (rows <= cols),
// shortest augmenting path with potentials. Returns column index per row.
inline std::vector<std::size_t> hungarian_rows(const std::vector<std::vector<double>>& cost, std::size_t cols) {
    const std::size_t n = cost.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(cols + 1, 0.0);
    std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(cols + 1, inf);
        std::vector<char> used(cols + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= cols; ++j) {
                if (used[j])
                    continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n, 0);
    for (std::size_t j = 1; j <= cols; ++j)
        if (p[j] != 0)
            assignment[p[j] - 1] = j - 1;
    return assignment;
}

} // namespace detail

/// Optimal one-to-one pairing of true and estimated angles minimizing total |delta u|.
inline AssociationResult associate(std::span<const double> truth, std::span<const double> est) {
    AssociationResult out;
    const std::size_t nt = truth.size();
    const std::size_t ne = est.size();
    std::vector<char> est_used(ne, 0);
    if (nt > 0 && ne > 0) {
        const bool rows_are_truth = nt <= ne;
        const std::size_t rows = rows_are_truth ? nt : ne;
        const std::size_t cols = rows_are_truth ? ne : nt;
        std::vector<std::vector<double>> cost(rows, std::vector<double>(cols));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                cost[i][j] = rows_are_truth ? std::abs(truth[i] - est[j]) : std::abs(truth[j] - est[i]);
        const auto assign = detail::hungarian_rows(cost, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            const std::size_t t = rows_are_truth ? i : assign[i];
            const std::size_t e = rows_are_truth ? assign[i] : i;
            out.pairs.push_back({t, e, std::abs(truth[t] - est[e])});
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const auto& a, const auto& b) { return a.truth < b.truth; });
    std::vector<char> truth_used(nt, 0);
    for (const auto& p : out.pairs) {
        truth_used[p.truth] = 1;
        est_used[p.estimate] = 1;
    }
    for (std::size_t i = 0; i < nt; ++i)
        if (!truth_used[i])
            out.unmatched_true.push_back(i);
    for (std::size_t i = 0; i < ne; ++i)
        if (!est_used[i])
            out.unmatched_est.push_back(i);
    return out;
}

struct DetectionMetrics {
    std::size_t hits = 0;
    std::size_t false_alarms = 0;
    double hit_rate = 0.0;
    double fa_rate = 0.0;
    double youden_j = 0.0;
    std::vector<char> hit_mask; // per true target
    std::vector<double> hit_gaps; // |delta u| per true target, NaN if not a hit
};

/// Hit: matched with |delta u| < halfwidth. Everything else detected is a false alarm.
inline DetectionMetrics detection_metrics(const AssociationResult& assoc, std::size_t k_true, double halfwidth) {
    if (k_true < 1)
        throw ContractError("detection_metrics: need at least one true target");
    DetectionMetrics d;
    d.hit_mask.assign(k_true, 0);
    d.hit_gaps.assign(k_true, std::numeric_limits<double>::quiet_NaN());
    for (const auto& p : assoc.pairs) {
        if (p.gap < halfwidth) {
            ++d.hits;
            d.hit_mask[p.truth] = 1;
            d.hit_gaps[p.truth] = p.gap;
        } else {
            ++d.false_alarms;
        }
    }
    d.false_alarms += assoc.unmatched_est.size();
    const std::size_t detections = assoc.pairs.size() + assoc.unmatched_est.size();
    d.hit_rate = static_cast<double>(d.hits) / static_cast<double>(k_true);
    d.fa_rate = static_cast<double>(d.false_alarms) / static_cast<double>(std::max<std::size_t>(1, detections));
    d.youden_j = d.hit_rate - d.fa_rate;
    return d;
}

/// Main-lobe half width 2/M of a half-wavelength M-element array.
inline double default_hit_halfwidth(std::size_t antennas) { return 2.0 / static_cast<double>(antennas); }

/**
 * RMSE per method over the true targets that every method hit. Returns
 * nullopt for every method when that common set is empty.
 */
inline std::vector<std::optional<double>> rmse_common_hits(std::span<const DetectionMetrics> per_method) {
    std::vector<std::optional<double>> out(per_method.size());
    if (per_method.empty())
        return out;
    const std::size_t k = per_method.front().hit_mask.size();
    std::vector<std::size_t> common;
    for (std::size_t t = 0; t < k; ++t) {
        bool all = true;
        for (const auto& d : per_method)
            all = all && d.hit_mask[t];
        if (all)
            common.push_back(t);
    }
    if (common.empty())
        return out;
    for (std::size_t i = 0; i < per_method.size(); ++i) {
        double s = 0.0;
        for (auto t : common)
            s += per_method[i].hit_gaps[t] * per_method[i].hit_gaps[t];
        out[i] = std::sqrt(s / static_cast<double>(common.size()));
    }
    return out;
}

/**
 * Diagonality in [0, 1]: r_i = |A_ii| / sum_j |A_ij|, score = (K mean(r) - 1)/(K - 1),
 * clamped. 1 for a diagonal matrix, 0 for a matrix with equal-magnitude entries.
 */
inline double diagonality_score(const ComplexMatrix& a) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw DimensionError("diagonality_score: matrix must be square and non-empty");
    const Eigen::Index k = a.rows();
    if (k == 1)
        return 1.0;
    double mean_ratio = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double row = a.row(i).cwiseAbs().sum();
        if (!(row > 0.0))
            throw ContractError("diagonality_score: all-zero row");
        mean_ratio += std::abs(a(i, i)) / row;
    }
    mean_ratio /= static_cast<double>(k);
    const double kk = static_cast<double>(k);
    return std::clamp((kk * mean_ratio - 1.0) / (kk - 1.0), 0.0, 1.0);
}

struct DiagnosticMetrics {
    double t_metric = 1.0; // steering-vector correlation
    double s_metric = 1.0; // signal correlation
};

/// Diagonality of T = A^H A / M and S = B' B'^H / L.
inline DiagnosticMetrics diagnostics(const GroundTruth& truth, const ComplexMatrix& coeffs, std::size_t antennas,
                                     double phase_factor) {
    const ComplexMatrix a = steering_matrix(truth.doas, antennas, phase_factor);
    const ComplexMatrix t = a.adjoint() * a / static_cast<double>(antennas);
    const ComplexMatrix s = coeffs * coeffs.adjoint() / static_cast<double>(coeffs.cols());
    return {diagonality_score(t), diagonality_score(s)};
}

} // namespace doalab
