// SPDX-License-Identifier: Apache-2.0
// Test-only reference computations. These deliberately avoid the library's
// own kernels (no FFT, no shared steering helpers) so agreement means something.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            a(i, j) = cd(g(rng), g(rng));
    return a;
}

// Haar-ish unitary from the Q factor of a Gaussian matrix.
inline Mat random_unitary(Eigen::Index n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Mat> qr(random_complex(n, n, rng));
    return qr.householderQ() * Mat::Identity(n, n);
}

// X X^H / cols; rank min(rows, cols).
inline Mat random_psd(Eigen::Index m, Eigen::Index cols, std::mt19937_64& rng) {
    const Mat x = random_complex(m, cols, rng);
    Mat r = x * x.adjoint() / static_cast<double>(cols);
    return (r + r.adjoint()) / 2.0;
}

inline cd steer(double u, Eigen::Index m, double phase = std::numbers::pi) {
    return std::polar(1.0, phase * u * static_cast<double>(m));
}

inline Mat steering(const std::vector<double>& us, Eigen::Index m, double phase = std::numbers::pi) {
    Mat a(m, static_cast<Eigen::Index>(us.size()));
    for (Eigen::Index k = 0; k < a.cols(); ++k)
        for (Eigen::Index i = 0; i < m; ++i)
            a(i, k) = steer(us[static_cast<std::size_t>(k)], i, phase);
    return a;
}

inline std::vector<double> grid_angles(std::size_t n) {
    std::vector<double> u(n);
    for (std::size_t p = 0; p < n; ++p)
        u[p] = -1.0 + 2.0 * static_cast<double>(p) / static_cast<double>(n);
    return u;
}

// ||A^H a(u)||^2 by explicit summation.
inline std::vector<double> colnorms_naive(const Mat& a, const std::vector<double>& us,
                                          double phase = std::numbers::pi) {
    std::vector<double> out(us.size());
    for (std::size_t p = 0; p < us.size(); ++p) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            cd acc = 0.0;
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                acc += std::conj(a(i, c)) * steer(us[p], i, phase);
            s += std::norm(acc);
        }
        out[p] = s;
    }
    return out;
}

// Projector onto span(A) through the complete orthogonal decomposition.
inline Mat projector(const Mat& a) {
    if (a.cols() == 0)
        return Mat::Zero(a.rows(), a.rows());
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
    return a * cod.pseudoInverse();
}

// V diag(sqrt(l)) from a direct solver call; this is the non-symmetric root.
inline Mat canonical_sqrt(const Mat& r) {
    Eigen::SelfAdjointEigenSolver<Mat> es(r);
    Eigen::VectorXd l = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * l.asDiagonal();
}

/**
 * Slow OLS objective: for each candidate u, ||(R^{1/2})^H P([sel, u])||_F^2
 * with P formed explicitly. Candidates making [sel, u] (numerically) rank
 * deficient are reported as -inf.
 */
inline std::vector<double> ols_slow(const Mat& sqrt_r, const std::vector<double>& selected,
                                    const std::vector<double>& us) {
    const Eigen::Index m = sqrt_r.rows();
    std::vector<double> out(us.size());
    for (std::size_t p = 0; p < us.size(); ++p) {
        std::vector<double> cols = selected;
        cols.push_back(us[p]);
        const Mat a = steering(cols, m);
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
        cod.setThreshold(1e-9);
        if (cod.rank() < a.cols()) {
            out[p] = -std::numeric_limits<double>::infinity();
            continue;
        }
        const Mat proj = a * cod.pseudoInverse();
        out[p] = (sqrt_r.adjoint() * proj).squaredNorm();
    }
    return out;
}

inline std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Minimum total |delta u| over all injective pairings (brute force).
inline double brute_force_assignment_cost(std::vector<double> truth, std::vector<double> est) {
    if (truth.size() > est.size())
        std::swap(truth, est);
    std::vector<std::size_t> perm(est.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i)
            c += std::abs(truth[i] - est[perm[i]]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Relative Frobenius error.
inline double rel(const Mat& a, const Mat& b) {
    const double nb = b.norm();
    return nb > 0 ? (a - b).norm() / nb : (a - b).norm();
}

// Numerical rank from singular values.
inline Eigen::Index svd_rank(const Mat& a, double rel_tol) {
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0))
            ++r;
    return r;
}

// Percentile bootstrap lower bound of the mean.
inline double bootstrap_lower(const std::vector<double>& x, double alpha, std::size_t resamples,
                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<double> means(resamples);
    for (auto& mean : means) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            s += x[pick(rng)];
        mean = s / static_cast<double>(x.size());
    }
    std::sort(means.begin(), means.end());
    const auto idx = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(resamples)));
    return means[std::min(idx, resamples - 1)];
}

} // namespace oracle
