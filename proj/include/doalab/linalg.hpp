// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "doalab/errors.hpp"

namespace doalab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
struct HermitianEvd {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;
};

namespace detail {

inline std::size_t& evd_counter() {
    thread_local std::size_t count = 0;
    return count;
}

} // namespace detail

/// Number of hermitian_evd() calls made on the calling thread.
inline std::size_t evd_call_count() { return detail::evd_counter(); }
inline void reset_evd_call_count() { detail::evd_counter() = 0; }

inline bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

inline ComplexMatrix identity(Eigen::Index n) {
    return ComplexMatrix::Identity(n, n);
}

/// Relative Frobenius distance ||a - b|| / max(||b||, tiny).
inline double relative_error(const ComplexMatrix& a, const ComplexMatrix& b) {
    const double denom = std::max(b.norm(), 1e-300);
    return (a - b).norm() / denom;
}

/**
 * Eigendecomposition of a Hermitian matrix.
 *
 * The input is symmetrized before decomposition. Eigenvalues are returned in
 * descending order (stable with respect to the solver's output order), and
 * negative eigenvalues within 1e-10 * lambda_max of zero are clamped to 0.
 */
inline HermitianEvd hermitian_evd(const ComplexMatrix& r) {
    if (r.rows() != r.cols() || r.rows() == 0)
        throw DimensionError("hermitian_evd: matrix must be square and non-empty");
    if (!all_finite(r))
        throw ContractError("hermitian_evd: non-finite entry");
    const double scale = r.norm();
    if ((r - r.adjoint()).norm() > 1e-8 * scale)
        throw ContractError("hermitian_evd: matrix is not Hermitian within tolerance");

    ++detail::evd_counter();

    const ComplexMatrix sym = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw ContractError("hermitian_evd: eigen solver did not converge");

    const Eigen::Index n = r.rows();
    // stable sort keeps solver order among equal eigenvalues
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        order[static_cast<std::size_t>(i)] = i;
    const auto& vals = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return vals(a) > vals(b); });

    HermitianEvd out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto src = order[static_cast<std::size_t>(i)];
        out.eigenvalues(i) = vals(src);
        out.eigenvectors.col(i) = solver.eigenvectors().col(src);
    }
    const double lmax = std::max(out.eigenvalues.maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double& l = out.eigenvalues(i);
        if (l >= 0.0)
            continue;
        if (-l > 1e-10 * lmax)
            throw ContractError("hermitian_evd: negative eigenvalue " + std::to_string(l));
        l = 0.0;
    }
    return out;
}

/// Canonical square root V * diag(sqrt(lambda)); columns follow the eigenvalue order.
inline ComplexMatrix covariance_sqrt(const HermitianEvd& evd) {
    const Eigen::Index n = evd.eigenvalues.size();
    ComplexMatrix out(evd.eigenvectors.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = evd.eigenvalues(i);
        if (l < 0.0)
            throw ContractError("covariance_sqrt: negative eigenvalue " + std::to_string(l));
        out.col(i) = evd.eigenvectors.col(i) * std::sqrt(l);
    }
    return out;
}

/**
 * Moore-Penrose pseudoinverse (A^H A)^{-1} A^H of a tall full-column-rank
 * matrix, via Cholesky of the Gram matrix. An M x 0 input gives a 0 x M result.
 */
inline ComplexMatrix pseudoinverse(const ComplexMatrix& a) {
    if (a.cols() == 0)
        return ComplexMatrix(0, a.rows());
    if (a.rows() < a.cols())
        throw DimensionError("pseudoinverse: matrix must be tall (rows >= cols)");

    const ComplexMatrix gram = a.adjoint() * a;
    // Rank guard on the (small) Gram spectrum. Not routed through
    // hermitian_evd so the instrumented EVD count stays meaningful.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> spectrum(gram, Eigen::EigenvaluesOnly);
    const double hi = spectrum.eigenvalues().maxCoeff();
    const double lo = spectrum.eigenvalues().minCoeff();
    if (!(hi > 0.0) || lo < 1e-12 * hi)
        throw SingularError("pseudoinverse: steering matrix is rank deficient");

    Eigen::LLT<ComplexMatrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw SingularError("pseudoinverse: Cholesky factorization failed");
    return llt.solve(a.adjoint());
}

struct Projectors {
    ComplexMatrix range;      // P = A A^+
    ComplexMatrix complement; // I - P
};

/// Orthogonal projectors onto span(A) and its complement. Empty A gives P = 0, Pc = I.
inline Projectors projectors(const ComplexMatrix& a, Eigen::Index m) {
    if (a.rows() != m)
        throw DimensionError("projectors: row count mismatch");
    Projectors out;
    if (a.cols() == 0) {
        out.range = ComplexMatrix::Zero(m, m);
        out.complement = identity(m);
        return out;
    }
    const ComplexMatrix p = a * pseudoinverse(a);
    out.range = 0.5 * (p + p.adjoint());
    out.complement = identity(m) - out.range;
    return out;
}

inline Projectors projectors(const ComplexMatrix& a) { return projectors(a, a.rows()); }

} // namespace doalab
