/**
 * @file banded.hpp
 * @brief Complex banded matrix with partial-pivoting LU, stored in the LAPACK
 *        general-band layout (kl extra superdiagonals reserved for row
 *        interchanges).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>

#include "rlm/errors.hpp"

namespace rlm {

class ComplexBandedMatrix {
public:
    using value_type = std::complex<double>;

    ComplexBandedMatrix() = default;

    ComplexBandedMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
          ab_(static_cast<std::size_t>(ldab_) * static_cast<std::size_t>(n), value_type(0.0)) {}

    [[nodiscard]] int size() const { return n_; }
    [[nodiscard]] int lower() const { return kl_; }
    [[nodiscard]] int upper() const { return ku_; }

    [[nodiscard]] bool in_band(int i, int j) const { return i - j <= kl_ && j - i <= ku_; }

    /// A(i, j); only valid for (i, j) inside the band.
    value_type& operator()(int i, int j) { return ab_[index(i, j)]; }
    [[nodiscard]] const value_type& operator()(int i, int j) const { return ab_[index(i, j)]; }

    [[nodiscard]] value_type get(int i, int j) const { return in_band(i, j) ? ab_[index(i, j)] : value_type(0.0); }

    /// Raw storage column j of the working band (length ldab).
    value_type* column(int j) { return ab_.data() + static_cast<std::size_t>(j) * ldab_; }
    [[nodiscard]] const value_type* column(int j) const { return ab_.data() + static_cast<std::size_t>(j) * ldab_; }
    [[nodiscard]] int ldab() const { return ldab_; }

    [[nodiscard]] Eigen::VectorXcd multiply(const Eigen::VectorXcd& x) const {
        Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n_);
        for (int j = 0; j < n_; ++j) {
            const int i0 = std::max(0, j - ku_);
            const int i1 = std::min(n_ - 1, j + kl_);
            for (int i = i0; i <= i1; ++i) y[i] += (*this)(i, j) * x[j];
        }
        return y;
    }

    /// Copies a square sparse matrix; bandwidths are taken from its nonzero pattern.
    template <class Sparse>
    [[nodiscard]] static ComplexBandedMatrix from_sparse(const Sparse& a) {
        int kl = 0;
        int ku = 0;
        for (int r = 0; r < a.outerSize(); ++r) {
            for (typename Sparse::InnerIterator it(a, r); it; ++it) {
                const int d = static_cast<int>(it.row()) - static_cast<int>(it.col());
                kl = std::max(kl, d);
                ku = std::max(ku, -d);
            }
        }
        ComplexBandedMatrix b(static_cast<int>(a.rows()), kl, ku);
        for (int r = 0; r < a.outerSize(); ++r) {
            for (typename Sparse::InnerIterator it(a, r); it; ++it) {
                b(static_cast<int>(it.row()), static_cast<int>(it.col())) += value_type(it.value());
            }
        }
        return b;
    }

private:
    [[nodiscard]] std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * ldab_ + static_cast<std::size_t>(kl_ + ku_ + i - j);
    }

    int n_ = 0;
    int kl_ = 0;
    int ku_ = 0;
    int ldab_ = 1;
    std::vector<value_type> ab_;
};

/// Bandwidth max|i - j| over the nonzeros of a sparse matrix.
template <class Sparse>
[[nodiscard]] int bandwidth(const Sparse& a) {
    int bw = 0;
    for (int r = 0; r < a.outerSize(); ++r) {
        for (typename Sparse::InnerIterator it(a, r); it; ++it) {
            bw = std::max(bw, std::abs(static_cast<int>(it.row()) - static_cast<int>(it.col())));
        }
    }
    return bw;
}

/// Relative pivot threshold below which a matrix is reported singular.
inline constexpr double default_pivot_tol = 1e-14;

class BandedLU {
public:
    /// Factorises a copy of `a` (taken by value; pass an rvalue to avoid the copy).
    explicit BandedLU(ComplexBandedMatrix a, double pivot_tol = default_pivot_tol)
        : lu_(std::move(a)), ipiv_(static_cast<std::size_t>(lu_.size())) {
        factor(pivot_tol);
    }

    [[nodiscard]] int size() const { return lu_.size(); }

    /// Solves A x = b.
    [[nodiscard]] Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const {
        Eigen::VectorXcd x = b;
        solve_in_place(x.data());
        return x;
    }

    void solve_in_place(std::complex<double>* b) const {
        const int n = lu_.size();
        const int kl = lu_.lower();
        const int kv = lu_.lower() + lu_.upper();
        // L y = P b
        for (int j = 0; j + 1 < n; ++j) {
            const int lm = std::min(kl, n - 1 - j);
            const int l = ipiv_[j];
            if (l != j) std::swap(b[l], b[j]);
            const auto* col = lu_.column(j) + kv + 1;
            const std::complex<double> bj = b[j];
            if (bj == std::complex<double>(0.0)) continue;
            for (int i = 0; i < lm; ++i) b[j + 1 + i] -= bj * col[i];
        }
        // U x = y
        for (int j = n - 1; j >= 0; --j) {
            const auto* col = lu_.column(j);
            b[j] /= col[kv];
            const std::complex<double> bj = b[j];
            if (bj == std::complex<double>(0.0)) continue;
            const int i0 = std::max(0, j - kv);
            for (int i = i0; i < j; ++i) b[i] -= bj * col[kv + i - j];
        }
    }

private:
    void factor(double pivot_tol) {
        const int n = lu_.size();
        const int kl = lu_.lower();
        const int ku = lu_.upper();
        const int kv = kl + ku;
        const int ld = lu_.ldab();

        double max_entry = 0.0;
        for (int j = 0; j < n; ++j) {
            const auto* col = lu_.column(j);
            for (int r = 0; r < ld; ++r) max_entry = std::max(max_entry, std::abs(col[r]));
        }
        const double threshold = pivot_tol * max_entry;

        int ju = 0;
        for (int j = 0; j < n; ++j) {
            auto* colj = lu_.column(j);
            const int km = std::min(kl, n - 1 - j);

            int jp = 0;
            double best = -1.0;
            for (int i = 0; i <= km; ++i) {
                const double m = std::abs(colj[kv + i].real()) + std::abs(colj[kv + i].imag());
                if (m > best) {
                    best = m;
                    jp = i;
                }
            }
            ipiv_[j] = j + jp;
            if (!(std::abs(colj[kv + jp]) > threshold)) {
                throw SingularMatrixError("banded LU: pivot below threshold at column " + std::to_string(j), j);
            }
            ju = std::max(ju, std::min(j + ku + jp, n - 1));

            if (jp != 0) {
                for (int c = j; c <= ju; ++c) {
                    auto* col = lu_.column(c);
                    std::swap(col[kv + j - c], col[kv + j + jp - c]);
                }
            }
            if (km > 0) {
                const std::complex<double> inv = 1.0 / colj[kv];
                for (int i = 1; i <= km; ++i) colj[kv + i] *= inv;
                const double* l = reinterpret_cast<const double*>(colj + kv + 1);
                for (int c = j + 1; c <= ju; ++c) {
                    auto* col = lu_.column(c);
                    const std::complex<double> x = col[kv + j - c];
                    if (x == std::complex<double>(0.0)) continue;
                    const double xr = x.real();
                    const double xi = x.imag();
                    double* a = reinterpret_cast<double*>(col + kv + j - c + 1);
                    for (int i = 0; i < km; ++i) {
                        const double lr = l[2 * i];
                        const double li = l[2 * i + 1];
                        a[2 * i] -= xr * lr - xi * li;
                        a[2 * i + 1] -= xr * li + xi * lr;
                    }
                }
            }
        }
    }

    ComplexBandedMatrix lu_;
    std::vector<int> ipiv_;
};

}  // namespace rlm
