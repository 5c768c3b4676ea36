// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <string_view>
#include <vector>

#include "doalab/fastgrid.hpp"
#include "doalab/linalg.hpp"
#include "doalab/scenario.hpp"

namespace doalab {

/// Selected DOAs and the projector onto the orthogonal complement of their steering vectors.
struct ProjectionState {
    DoaEstimate selected;
    ComplexMatrix pc; // I - P(selected)

    std::size_t iteration() const { return selected.size(); }

    static ProjectionState empty(std::size_t m) {
        return {DoaEstimate{}, identity(static_cast<Eigen::Index>(m))};
    }

    // Recomputes Pc from the full selected steering matrix (no rank-1 downdates).
    void add(const GridEvaluator& ge, std::size_t idx) {
        if (std::find(selected.indices.begin(), selected.indices.end(), idx) != selected.indices.end())
            throw SingularError("greedy update: grid angle already selected");
        selected.push(ge.grid(), idx);
        const auto a = steering_matrix(selected.angles, ge.antennas(), ge.phase_factor());
        pc = projectors(a).complement;
    }
};

struct GreedyState {
    ProjectionState proj;
    ComplexMatrix sqrt_r;        // R^{1/2}, fixed
    ComplexMatrix residual_sqrt; // Pc R^{1/2}

    std::size_t iteration() const { return proj.iteration(); }
    const DoaEstimate& selected() const { return proj.selected; }

    static GreedyState initial(const ComplexMatrix& sqrt_r) {
        GreedyState s;
        s.proj = ProjectionState::empty(static_cast<std::size_t>(sqrt_r.rows()));
        s.sqrt_r = sqrt_r;
        s.residual_sqrt = sqrt_r;
        return s;
    }
};

enum class GreedyMethod { Omp, Ols };

inline std::string_view to_string(GreedyMethod m) { return m == GreedyMethod::Omp ? "omp" : "ols"; }

/**
 * OMP: ||(Pc R^{1/2})^H a||^2, with already-selected grid points excluded.
 * OLS: the same numerator over ||Pc a||^2, masked where that falls below 1e-9 M.
 */
inline Pseudospectrum greedy_objective(const GreedyState& s, const GridEvaluator& ge, GreedyMethod method,
                                       Evaluator ev) {
    ObjectiveOperands ops;
    ops.numerator = &s.residual_sqrt;
    if (method == GreedyMethod::Omp) {
        ops.form = ObjectiveForm::Norm;
    } else {
        ops.form = ObjectiveForm::Ratio;
        ops.denominator = &s.proj.pc;
    }
    ops.excluded = s.proj.selected.indices;
    return evaluate_objective(ge, ops, ev);
}

inline GreedyState greedy_update(GreedyState s, const GridEvaluator& ge, std::size_t idx) {
    s.proj.add(ge, idx);
    s.residual_sqrt = s.proj.pc * s.sqrt_r;
    return s;
}

/// K rounds of objective, argmax and update. Output keeps selection order.
inline DoaEstimate greedy_estimate(const ComplexMatrix& sqrt_r, std::size_t k, GreedyMethod method,
                                   const GridEvaluator& ge, Evaluator ev) {
    if (k < 1 || static_cast<Eigen::Index>(k) >= sqrt_r.rows())
        throw ContractError("greedy_estimate: need 1 <= K < M");
    auto state = GreedyState::initial(sqrt_r);
    for (std::size_t it = 0; it < k; ++it) {
        const auto ps = greedy_objective(state, ge, method, ev);
        state = greedy_update(std::move(state), ge, ps.argmax());
    }
    return state.proj.selected;
}

/// trace(R P(selected)): energy captured by the selected steering vectors.
inline double captured_energy(const ComplexMatrix& r, std::span<const double> angles, std::size_t m,
                              double phase_factor) {
    if (angles.empty())
        return 0.0;
    const auto p = projectors(steering_matrix(angles, m, phase_factor)).range;
    return (r * p).trace().real();
}

} // namespace doalab
