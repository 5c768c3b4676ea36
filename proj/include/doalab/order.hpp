// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string_view>
#include <vector>

#include "doalab/gimusic.hpp"
#include "doalab/greedy.hpp"
#include "doalab/subspace.hpp"

namespace doalab {

enum class OrderCriterion { RankAic, Hybrid };

inline std::string_view to_string(OrderCriterion c) { return c == OrderCriterion::RankAic ? "rank-aic" : "hybrid"; }

struct OrderEstimate {
    std::size_t k_hat = 0;
    std::vector<double> criterion_curve; // indexed by candidate order
    OrderCriterion criterion = OrderCriterion::RankAic;
    DoaEstimate selected;                // hybrid only: the accepted angles
};

/**
 * Wax-Kailath AIC on descending eigenvalues with L snapshots:
 *   AIC(k) = -2 L (M-k) ln(g_k / a_k) + 2 k (2M - k)
 * where g_k, a_k are the geometric and arithmetic means of the M-k smallest
 * eigenvalues. Zeros are floored at 1e-300 before the logarithm.
 */
inline OrderEstimate aic_rank(std::span<const double> eigenvalues, std::size_t snapshots) {
    const std::size_t m = eigenvalues.size();
    if (m < 2)
        throw ContractError("aic_rank: need at least two eigenvalues");
    if (snapshots < 1)
        throw ContractError("aic_rank: need at least one snapshot");
    for (double l : eigenvalues)
        if (l < 0.0)
            throw ContractError("aic_rank: negative eigenvalue");

    OrderEstimate out;
    out.criterion = OrderCriterion::RankAic;
    out.criterion_curve.resize(m);
    const double big_l = static_cast<double>(snapshots);
    const double big_m = static_cast<double>(m);
    const double floor = 1e-10 * *std::max_element(eigenvalues.begin(), eigenvalues.end());
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t tail = m - k;
        double log_sum = 0.0;
        double sum = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            // below the rounding floor counts as an exact zero
            const double l = eigenvalues[i] > floor ? eigenvalues[i] : 1e-300;
            log_sum += std::log(l);
            sum += l;
        }
        const double log_geo = log_sum / static_cast<double>(tail);
        const double log_arith = std::log(std::max(sum / static_cast<double>(tail), 1e-300));
        const double kk = static_cast<double>(k);
        out.criterion_curve[k] =
            -2.0 * big_l * static_cast<double>(tail) * (log_geo - log_arith) + 2.0 * kk * (2.0 * big_m - kk);
    }
    out.k_hat = static_cast<std::size_t>(
        std::min_element(out.criterion_curve.begin(), out.criterion_curve.end()) - out.criterion_curve.begin());
    return out;
}

inline OrderEstimate aic_rank(const RealVector& eigenvalues, std::size_t snapshots) {
    return aic_rank(std::span<const double>(eigenvalues.data(), static_cast<std::size_t>(eigenvalues.size())),
                    snapshots);
}

struct StopInput {
    std::size_t k = 0;
    double residual_ratio = 1.0; // eps_k = 1 - tr(R P_k) / tr(R), floored
    std::size_t snapshots = 1;
    std::size_t antennas = 2;
};

/// C(k) evaluated for each prefix of the greedy selection; lower is better.
using StoppingRule = std::function<double(const StopInput&)>;

/// C(k) = 2 L M ln(eps_k) + 2 k (2M - k + 1).
inline double penalized_residual_rule(const StopInput& in) {
    const double l = static_cast<double>(in.snapshots);
    const double m = static_cast<double>(in.antennas);
    const double k = static_cast<double>(in.k);
    return 2.0 * l * m * std::log(in.residual_ratio) + 2.0 * k * (2.0 * m - k + 1.0);
}

/**
 * Stops a precomputed greedy selection sequence: the first base.k_hat angles
 * are always kept, angle k+1 is accepted only while C(k+1) < C(k).
 */
inline OrderEstimate hybrid_stop(const ComplexMatrix& r, const DoaEstimate& sequence, const OrderEstimate& base,
                                 std::size_t snapshots, double phase_factor,
                                 const StoppingRule& rule = penalized_residual_rule) {
    const std::size_t max_k = sequence.size();
    if (base.k_hat > max_k)
        throw ContractError("hybrid_stop: base order exceeds the selection sequence");
    const std::size_t m = static_cast<std::size_t>(r.rows());
    const double total = r.trace().real();

    OrderEstimate out;
    out.criterion = OrderCriterion::Hybrid;
    out.criterion_curve.resize(max_k + 1);
    for (std::size_t k = 0; k <= max_k; ++k) {
        const std::span<const double> prefix(sequence.angles.data(), k);
        // residual trace taken directly; 1 - captured/total cancels badly near zero
        const auto pc = projectors(steering_matrix(prefix, m, phase_factor), static_cast<Eigen::Index>(m)).complement;
        const double resid = (pc * r).trace().real();
        const double eps = total > 0.0 ? std::max(resid / total, 1e-12) : 1e-12;
        out.criterion_curve[k] = rule(StopInput{k, eps, snapshots, m});
    }
    std::size_t k = base.k_hat;
    while (k < max_k && out.criterion_curve[k + 1] < out.criterion_curve[k])
        ++k;
    out.k_hat = k;
    out.selected.indices.assign(sequence.indices.begin(), sequence.indices.begin() + static_cast<std::ptrdiff_t>(k));
    out.selected.angles.assign(sequence.angles.begin(), sequence.angles.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

/// OLS-family estimators that can drive the hybrid criterion.
enum class HybridDriver { Ols, OlsImusicSignal, OlsImusicNoise, OlsIwmusic };

inline DoaEstimate run_driver(const ComplexMatrix& r, std::size_t k, HybridDriver driver, const GridEvaluator& ge,
                              Evaluator ev) {
    switch (driver) {
    case HybridDriver::Ols:
        return greedy_estimate(covariance_sqrt(hermitian_evd(r)), k, GreedyMethod::Ols, ge, ev);
    case HybridDriver::OlsImusicSignal:
        return gimusic_estimate(r, k, GimusicVariant::OlsImusicSignal, ge, ev);
    case HybridDriver::OlsImusicNoise:
        return gimusic_estimate(r, k, GimusicVariant::OlsImusicNoise, ge, ev);
    case HybridDriver::OlsIwmusic:
        return gimusic_estimate(r, k, GimusicVariant::OlsIwmusic, ge, ev);
    }
    return {};
}

/**
 * Hybrid order: runs the driver for max_k selections (the signal subspace of
 * iMUSIC drivers is sized max_k) and applies hybrid_stop. The result is never
 * below base.k_hat.
 */
inline OrderEstimate hybrid_order(const ComplexMatrix& r, std::size_t max_k, const OrderEstimate& base,
                                  HybridDriver driver, std::size_t snapshots, const GridEvaluator& ge, Evaluator ev,
                                  const StoppingRule& rule = penalized_residual_rule) {
    if (base.k_hat > max_k || static_cast<Eigen::Index>(max_k) >= r.rows())
        throw ContractError("hybrid_order: need base.k_hat <= max_k < M");
    if (max_k == 0) {
        OrderEstimate out = base;
        out.criterion = OrderCriterion::Hybrid;
        out.selected = {};
        return out;
    }
    const auto sequence = run_driver(r, max_k, driver, ge, ev);
    return hybrid_stop(r, sequence, base, snapshots, ge.phase_factor(), rule);
}

} // namespace doalab
