// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <vector>

#include "doalab/fastgrid.hpp"
#include "doalab/greedy.hpp"
#include "doalab/subspace.hpp"

namespace doalab {

/**
 * Greedy iterative MUSIC selection rules.
 *
 *   OmpImusic        ||S_k^H a||^2
 *   OlsImusicSignal  ||S_k^H a||^2 / ||Pc a||^2
 *   OlsImusicNoise   1 - ||G_k^H a||^2 / ||Pc a||^2   (same argmax as the signal form)
 *   OmpIwmusic       ||(S_k Ls^{1/2})^H a||^2
 *   OlsIwmusic       ||(S_k Ls^{1/2})^H a||^2 / ||Pc a||^2
 *
 * with S_k = Pc S and G_k = Pc G, where S, G come from a single EVD of R.
 */
enum class GimusicVariant { OmpImusic, OlsImusicSignal, OlsImusicNoise, OmpIwmusic, OlsIwmusic };

inline std::string_view to_string(GimusicVariant v) {
    switch (v) {
    case GimusicVariant::OmpImusic: return "omp-imusic";
    case GimusicVariant::OlsImusicSignal: return "ols-imusic-signal";
    case GimusicVariant::OlsImusicNoise: return "ols-imusic-noise";
    case GimusicVariant::OmpIwmusic: return "omp-iwmusic";
    case GimusicVariant::OlsIwmusic: return "ols-iwmusic";
    }
    return "?";
}

inline bool is_ratio(GimusicVariant v) {
    return v == GimusicVariant::OlsImusicSignal || v == GimusicVariant::OlsImusicNoise ||
           v == GimusicVariant::OlsIwmusic;
}

inline bool is_weighted(GimusicVariant v) {
    return v == GimusicVariant::OmpIwmusic || v == GimusicVariant::OlsIwmusic;
}

/// Cheaper OLS-iMUSIC form: signal subspace when K <= M - K.
inline GimusicVariant default_ols_imusic_variant(std::size_t k, std::size_t m) {
    return k <= m - k ? GimusicVariant::OlsImusicSignal : GimusicVariant::OlsImusicNoise;
}

struct GimusicState {
    ProjectionState proj;
    ComplexMatrix signal; // S from the initial EVD
    ComplexMatrix noise;  // G, empty unless the noise form is tracked
    RealVector lambda_s;
    RealVector lambda_n;
    ComplexMatrix sres;   // Pc S
    ComplexMatrix gres;   // Pc G (only when tracked)
    bool track_noise = false;

    std::size_t iteration() const { return proj.iteration(); }
    const DoaEstimate& selected() const { return proj.selected; }

    static GimusicState initial(const SubspaceDecomposition& dec, bool track_noise) {
        GimusicState s;
        s.proj = ProjectionState::empty(dec.antennas());
        s.signal = dec.signal;
        s.sres = dec.signal;
        s.lambda_s = dec.lambda_s;
        s.lambda_n = dec.lambda_n;
        s.track_noise = track_noise;
        if (track_noise) {
            s.noise = dec.noise;
            s.gres = dec.noise;
        }
        return s;
    }
};

inline Pseudospectrum gimusic_objective(const GimusicState& s, const GridEvaluator& ge, GimusicVariant variant,
                                        Evaluator ev) {
    ObjectiveOperands ops;
    ComplexMatrix weighted;
    switch (variant) {
    case GimusicVariant::OmpImusic:
    case GimusicVariant::OlsImusicSignal:
        ops.numerator = &s.sres;
        break;
    case GimusicVariant::OmpIwmusic:
    case GimusicVariant::OlsIwmusic:
        weighted = weight_columns(s.sres, s.lambda_s);
        ops.numerator = &weighted;
        break;
    case GimusicVariant::OlsImusicNoise:
        if (!s.track_noise)
            throw ContractError("gimusic_objective: noise form requested but residual noise subspace not tracked");
        ops.numerator = &s.gres;
        break;
    }
    if (variant == GimusicVariant::OlsImusicNoise) {
        ops.form = ObjectiveForm::OneMinusRatio;
        ops.denominator = &s.proj.pc;
    } else if (is_ratio(variant)) {
        ops.form = ObjectiveForm::Ratio;
        ops.denominator = &s.proj.pc;
    } else {
        ops.form = ObjectiveForm::Norm;
    }
    ops.excluded = s.proj.selected.indices;
    return evaluate_objective(ge, ops, ev);
}

/// Projector update plus S_k = Pc S (and G_k = Pc G when tracked). No EVD.
inline GimusicState gimusic_update(GimusicState s, const GridEvaluator& ge, std::size_t idx) {
    s.proj.add(ge, idx);
    s.sres = s.proj.pc * s.signal;
    if (s.track_noise)
        s.gres = s.proj.pc * s.noise;
    return s;
}

struct GimusicOptions {
    // Re-decompose the residual covariance Pc R Pc every iteration, emulating
    // the per-iteration EVD cost of earlier iterative MUSIC schemes.
    bool evd_per_iteration = false;
};

inline DoaEstimate gimusic_estimate(const SubspaceDecomposition& dec, const ComplexMatrix& r, std::size_t k,
                                    GimusicVariant variant, const GridEvaluator& ge, Evaluator ev,
                                    GimusicOptions opts = {}) {
    const bool noise = variant == GimusicVariant::OlsImusicNoise;
    auto state = GimusicState::initial(dec, noise);
    for (std::size_t it = 0; it < k; ++it) {
        if (opts.evd_per_iteration && it > 0) {
            const ComplexMatrix rk = state.proj.pc * r * state.proj.pc;
            const auto re = partition(rk, dec.order());
            // rank(rk) <= M - it, so the top K eigenvectors can reach into
            // span(A_k); project like the single-EVD path does
            state.sres = state.proj.pc * re.signal;
            state.lambda_s = re.lambda_s;
            if (noise)
                state.gres = state.proj.pc * re.noise;
        }
        const auto ps = gimusic_objective(state, ge, variant, ev);
        state = gimusic_update(std::move(state), ge, ps.argmax());
    }
    return state.proj.selected;
}

/**
 * Full G-iMUSIC pipeline from a sample covariance: one EVD and partition,
 * then K select/update rounds. With evd_per_iteration the residual covariance
 * is re-decomposed at every later round (K EVDs in total).
 */
inline DoaEstimate gimusic_estimate(const ComplexMatrix& r, std::size_t k, GimusicVariant variant,
                                    const GridEvaluator& ge, Evaluator ev, GimusicOptions opts = {}) {
    if (k < 1 || static_cast<Eigen::Index>(k) >= r.rows())
        throw ContractError("gimusic_estimate: need 1 <= K < M");
    const auto dec = partition(r, k);
    return gimusic_estimate(dec, r, k, variant, ge, ev, opts);
}

} // namespace doalab
