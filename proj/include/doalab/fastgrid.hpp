// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "doalab/linalg.hpp"
#include "doalab/scenario.hpp"

namespace doalab {

enum class Evaluator { Direct, Fft };

/**
 * Uniform search grid over the normalized angle u in [-1, 1).
 *
 * Ascending index p holds u_p = -1 + 2p/N. With a half-wavelength ULA the
 * steering vector at u_p equals the conjugate-free DFT column of bin
 * n = (N/2 - p) mod N, i.e. e^{j pi u m} = e^{-j 2 pi m n / N}.
 */
struct DoaGrid {
    std::size_t n = 0;
    std::vector<double> angles;     // ascending
    std::vector<std::size_t> bin_of; // ascending index -> FFT bin

    std::size_t size() const { return n; }

    /// Nearest grid index for a normalized angle.
    std::size_t index_of(double u) const {
        const double pos = (u + 1.0) * static_cast<double>(n) / 2.0;
        auto idx = static_cast<long long>(std::llround(pos));
        const auto nn = static_cast<long long>(n);
        idx = ((idx % nn) + nn) % nn;
        return static_cast<std::size_t>(idx);
    }
};

inline bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

inline DoaGrid make_grid(std::size_t n, std::size_t m) {
    if (n < 2 * m)
        throw ConfigError("make_grid: N must be >= 2M");
    if (n % 2 != 0)
        throw ConfigError("make_grid: N must be even");
    DoaGrid g;
    g.n = n;
    g.angles.resize(n);
    g.bin_of.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        g.angles[p] = -1.0 + 2.0 * static_cast<double>(p) / static_cast<double>(n);
        g.bin_of[p] = (n / 2 + n - p) % n;
    }
    return g;
}

/// In-place iterative radix-2 decimation-in-time FFT of a fixed size.
class Radix2Fft {
public:
    explicit Radix2Fft(std::size_t n) : n_(n) {
        if (!is_power_of_two(n))
            throw ConfigError("Radix2Fft: size must be a power of two");
        twiddle_.resize(n / 2 + 1);
        for (std::size_t k = 0; k < twiddle_.size(); ++k)
            twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
        reversed_.resize(n);
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n)
            ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b))
                    r |= std::size_t{1} << (bits - 1 - b);
            reversed_[i] = r;
        }
    }

    std::size_t size() const { return n_; }

    void forward(std::span<Complex> x) const {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j = reversed_[i];
            if (i < j)
                std::swap(x[i], x[j]);
        }
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t step = n_ / len;
            for (std::size_t i = 0; i < n_; i += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    const Complex w = twiddle_[k * step];
                    const Complex b = x[i + k + half];
                    // manual product avoids the Annex G slow path of operator*
                    const double vr = b.real() * w.real() - b.imag() * w.imag();
                    const double vi = b.real() * w.imag() + b.imag() * w.real();
                    const Complex a = x[i + k];
                    x[i + k] = Complex(a.real() + vr, a.imag() + vi);
                    x[i + k + half] = Complex(a.real() - vr, a.imag() - vi);
                }
            }
        }
    }

private:
    std::size_t n_;
    std::vector<Complex> twiddle_;
    std::vector<std::size_t> reversed_;
};

/**
 * Evaluates squared column norms ||A^H a(u)||^2 over every grid angle,
 * either by a dense product with the precomputed steering matrix or by FFT.
 *
 * The FFT route zero-pads each column to the next power of two M2 >= M and
 * splits the N-point transform into N/M2 twiddled M2-point transforms, so the
 * cost per column is O(N log M2) instead of O(N M).
 */
class GridEvaluator {
public:
    GridEvaluator(DoaGrid grid, std::size_t antennas, double phase_factor = std::numbers::pi)
        : grid_(std::move(grid)), m_(antennas), phase_factor_(phase_factor), fft_(next_pow2(antennas)) {
        if (grid_.n < 2 * m_)
            throw ConfigError("GridEvaluator: N must be >= 2M");
        steering_ = steering_matrix(grid_.angles, m_, phase_factor_);

        const std::size_t n = grid_.n;
        m2_ = fft_.size();
        if (n % m2_ != 0 || !is_power_of_two(n)) {
            fft_capable_ = false;
            return;
        }
        fft_capable_ = std::abs(phase_factor_ - std::numbers::pi) < 1e-15;
        decimation_ = n / m2_;
        twiddle_.resize(decimation_ * m_);
        for (std::size_t p = 0; p < decimation_; ++p)
            for (std::size_t m = 0; m < m_; ++m)
                twiddle_[p * m_ + m] = std::polar(
                    1.0, -2.0 * std::numbers::pi * static_cast<double>((m * p) % n) / static_cast<double>(n));
        ascending_of_bin_.resize(n);
        for (std::size_t p = 0; p < n; ++p)
            ascending_of_bin_[grid_.bin_of[p]] = p;
    }

    GridEvaluator(std::size_t n, std::size_t antennas, double phase_factor = std::numbers::pi)
        : GridEvaluator(make_grid(n, antennas), antennas, phase_factor) {}

    const DoaGrid& grid() const { return grid_; }
    std::size_t antennas() const { return m_; }
    double phase_factor() const { return phase_factor_; }
    bool fft_capable() const { return fft_capable_; }
    const ComplexMatrix& steering() const { return steering_; }

    std::vector<double> colnorms_sq(const ComplexMatrix& a, Evaluator ev) const {
        if (ev == Evaluator::Fft && fft_capable_)
            return colnorms_sq_fft(a);
        return colnorms_sq_direct(a);
    }

    std::vector<double> colnorms_sq_direct(const ComplexMatrix& a) const {
        check_rows(a);
        std::vector<double> out(grid_.n, 0.0);
        if (a.cols() == 0)
            return out;
        const ComplexMatrix prod = a.adjoint() * steering_;
        for (std::size_t p = 0; p < grid_.n; ++p)
            out[p] = prod.col(static_cast<Eigen::Index>(p)).squaredNorm();
        return out;
    }

    std::vector<double> colnorms_sq_fft(const ComplexMatrix& a) const {
        check_rows(a);
        if (!fft_capable_)
            throw ConfigError("colnorms_sq_fft: grid/array combination is not FFT-compatible");
        const std::size_t n = grid_.n;
        std::vector<double> out(n, 0.0);
        std::vector<Complex> column(m_);
        std::vector<Complex> buf(m2_);
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            for (std::size_t m = 0; m < m_; ++m)
                column[m] = std::conj(a(static_cast<Eigen::Index>(m), c));
            for (std::size_t p = 0; p < decimation_; ++p) {
                const Complex* tw = &twiddle_[p * m_];
                for (std::size_t m = 0; m < m_; ++m) {
                    const Complex x = column[m];
                    const Complex w = tw[m];
                    buf[m] = Complex(x.real() * w.real() - x.imag() * w.imag(),
                                     x.real() * w.imag() + x.imag() * w.real());
                }
                for (std::size_t m = m_; m < m2_; ++m)
                    buf[m] = Complex(0.0, 0.0);
                fft_.forward(buf);
                for (std::size_t l = 0; l < m2_; ++l) {
                    const Complex v = buf[l];
                    out[ascending_of_bin_[p + decimation_ * l]] += v.real() * v.real() + v.imag() * v.imag();
                }
            }
        }
        return out;
    }

private:
    static std::size_t next_pow2(std::size_t x) {
        std::size_t p = 1;
        while (p < x)
            p <<= 1;
        return p;
    }

    void check_rows(const ComplexMatrix& a) const {
        if (static_cast<std::size_t>(a.rows()) != m_)
            throw DimensionError("GridEvaluator: operand must have M rows");
    }

    DoaGrid grid_;
    std::size_t m_;
    double phase_factor_;
    Radix2Fft fft_;
    std::size_t m2_ = 0;
    std::size_t decimation_ = 0;
    bool fft_capable_ = false;
    ComplexMatrix steering_;
    std::vector<Complex> twiddle_;
    std::vector<std::size_t> ascending_of_bin_;
};

/// One-shot FFT column norms (half-wavelength array), ascending-angle order.
inline std::vector<double> colnorms_sq_fft(const ComplexMatrix& a, const DoaGrid& grid) {
    GridEvaluator ev(grid, static_cast<std::size_t>(a.rows()));
    return ev.colnorms_sq_fft(a);
}

/// Objective values over the grid, ascending-angle order.
struct Pseudospectrum {
    std::vector<double> values;
    const DoaGrid* grid = nullptr;

    std::size_t argmax() const {
        std::size_t best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!found || values[i] > best_val) {
                best = i;
                best_val = values[i];
                found = true;
            }
        return best;
    }
    double angle(std::size_t idx) const { return grid->angles[idx]; }
};

/// Grid-resolution estimate; angles[i] == grid.angles[indices[i]].
struct DoaEstimate {
    std::vector<std::size_t> indices;
    std::vector<double> angles;

    void push(const DoaGrid& g, std::size_t idx) {
        indices.push_back(idx);
        angles.push_back(g.angles[idx]);
    }
    std::size_t size() const { return indices.size(); }
};

enum class ObjectiveForm {
    Norm,          // ||num^H a||^2
    InverseNorm,   // 1 / ||num^H a||^2, saturating
    Ratio,         // ||num^H a||^2 / ||den a||^2
    OneMinusRatio, // 1 - ||num^H a||^2 / ||den a||^2
};

inline constexpr double kSaturationValue = 1e15;
inline constexpr double kSaturationFloor = 1e-15; // times M
inline constexpr double kMaskFloor = 1e-9;        // times M

struct ObjectiveOperands {
    const ComplexMatrix* numerator = nullptr;
    const ComplexMatrix* denominator = nullptr; // Pc for ratio forms
    ObjectiveForm form = ObjectiveForm::Norm;
    std::span<const std::size_t> excluded; // grid indices forced to -inf
};

/**
 * Combines numerator/denominator column norms into an objective. Ratio forms
 * mask candidates with ||Pc a||^2 < 1e-9 M to -inf; the inverse form
 * saturates at 1e15 when the norm drops below 1e-15 M.
 */
inline Pseudospectrum evaluate_objective(const GridEvaluator& ge, const ObjectiveOperands& ops, Evaluator ev) {
    Pseudospectrum ps;
    ps.grid = &ge.grid();
    ps.values = ge.colnorms_sq(*ops.numerator, ev);
    const double m = static_cast<double>(ge.antennas());
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();

    switch (ops.form) {
    case ObjectiveForm::Norm:
        break;
    case ObjectiveForm::InverseNorm:
        for (double& v : ps.values)
            v = v < kSaturationFloor * m ? kSaturationValue : 1.0 / v;
        break;
    case ObjectiveForm::Ratio:
    case ObjectiveForm::OneMinusRatio: {
        const auto den = ge.colnorms_sq(*ops.denominator, ev);
        const bool one_minus = ops.form == ObjectiveForm::OneMinusRatio;
        for (std::size_t i = 0; i < den.size(); ++i) {
            if (den[i] < kMaskFloor * m)
                ps.values[i] = neg_inf;
            else
                ps.values[i] = one_minus ? 1.0 - ps.values[i] / den[i] : ps.values[i] / den[i];
        }
        break;
    }
    }
    for (auto idx : ops.excluded)
        ps.values[idx] = neg_inf;
    return ps;
}

inline Pseudospectrum objective_via_fft(const GridEvaluator& ge, const ObjectiveOperands& ops) {
    return evaluate_objective(ge, ops, Evaluator::Fft);
}

} // namespace doalab
