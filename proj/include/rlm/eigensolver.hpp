/**
 * @file eigensolver.hpp
 * @brief Shift-invert Arnoldi for S w = lambda M w near a complex shift sigma.
 *
 * The Krylov space is built for OP = (S - sigma M)^{-1} M, whose dominant
 * eigenvalues mu = 1 / (lambda - sigma) belong to the lambda closest to sigma.
 * Orthogonalisation is modified Gram-Schmidt followed by one reorthogonalisation
 * pass. Restarts use the Krylov-Schur scheme: the projected matrix is brought to
 * complex Schur form, reordered so the wanted Ritz values lead, and truncated.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rlm/assembly.hpp"
#include "rlm/banded.hpp"
#include "rlm/errors.hpp"
#include "rlm/field.hpp"
#include "rlm/model.hpp"

namespace rlm {

struct EigenPair {
    cplx lambda;            ///< eigenvalue k^2
    ComplexVector vector;   ///< unknowns, unit L2 norm (Euclidean when no mass is given)
    double residual = 0.0;  ///< |S v - lambda M v| / (|S v| + |lambda| |M v|)
};

struct ArnoldiOptions {
    int nev = 6;
    int ncv = 0;             ///< Krylov dimension; 0 selects 3 * nev + 20
    double tol = 1e-8;       ///< relative residual accepted for a pair
    int max_restarts = 60;
};

struct ArnoldiResult {
    std::vector<EigenPair> pairs;  ///< ordered by |lambda - sigma|
    bool converged = false;        ///< all nev pairs reached tol
    int restarts = 0;
    std::string message;
};

/// Relative residual of a generalized eigenpair.
[[nodiscard]] inline double pair_residual(const ComplexSparseMatrix& S, const ComplexSparseMatrix& M,
                                          cplx lambda, const ComplexVector& v) {
    const ComplexVector sv = S * v;
    const ComplexVector mv = M * v;
    const double denom = sv.norm() + std::abs(lambda) * mv.norm();
    if (denom == 0.0) return 0.0;
    return (sv - lambda * mv).norm() / denom;
}

namespace detail {

/// Swaps diagonal entries k and k+1 of the upper-triangular T, updating Q so
/// that Q T Q^H is preserved.
inline void swap_schur(Eigen::MatrixXcd& T, Eigen::MatrixXcd& Q, int k) {
    const cplx t11 = T(k, k);
    const cplx t22 = T(k + 1, k + 1);
    cplx a = T(k, k + 1);
    cplx b = t22 - t11;
    const double nrm = std::hypot(std::abs(a), std::abs(b));
    if (nrm == 0.0) return;
    a /= nrm;
    b /= nrm;
    Eigen::Matrix2cd G;
    G << a, -std::conj(b), b, std::conj(a);
    T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
    T.middleCols(k, 2) = T.middleCols(k, 2) * G;
    Q.middleCols(k, 2) = Q.middleCols(k, 2) * G;
    T(k + 1, k) = 0.0;
    T(k, k) = t22;
    T(k + 1, k + 1) = t11;
}

}  // namespace detail

/// Reorders a complex Schur form so |T(i,i)| is non-increasing.
inline void sort_schur_by_magnitude(Eigen::MatrixXcd& T, Eigen::MatrixXcd& Q) {
    const int n = static_cast<int>(T.rows());
    for (int i = 0; i < n; ++i) {
        int best = i;
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(T(j, j)) > std::abs(T(best, best))) best = j;
        }
        for (int k = best - 1; k >= i; --k) detail::swap_schur(T, Q, k);
    }
}

/// Dominant eigenpairs of a linear operator by Krylov-Schur Arnoldi.
/// `accept` decides whether a Ritz pair (mu, x) is good enough; it is consulted
/// once the Krylov residual estimate is below `tol * |mu|`.
class KrylovSchur {
public:
    using Operator = std::function<void(const ComplexVector&, ComplexVector&)>;

    KrylovSchur(Operator op, int n, int nev, int ncv) : op_(std::move(op)), n_(n), nev_(nev) {
        ncv_ = std::min(n, ncv > 0 ? ncv : 3 * nev + 20);
        nev_ = std::min(nev_, std::max(1, ncv_ - 1));
    }

    struct Ritz {
        cplx mu;
        ComplexVector x;  ///< unit Euclidean norm
        double estimate;  ///< Krylov residual estimate |OP x - mu x|
    };

    std::vector<Ritz> run(const ComplexVector& start, double tol, int max_restarts,
                          const std::function<bool(const Ritz&)>& accept, int* restarts_out, bool* ok) {
        V_ = Eigen::MatrixXcd::Zero(n_, ncv_ + 1);
        H_ = Eigen::MatrixXcd::Zero(ncv_ + 1, ncv_);
        V_.col(0) = start / start.norm();
        int kept = 0;
        double op_tol = tol;
        std::vector<Ritz> best;
        *ok = false;
        for (int restart = 0; restart <= max_restarts; ++restart) {
            *restarts_out = restart;
            extend(kept);
            const int m = ncv_;
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H_.topLeftCorner(m, m));
            std::vector<int> order(m);
            for (int i = 0; i < m; ++i) order[i] = i;
            const auto& mu = es.eigenvalues();
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return std::abs(mu[a]) > std::abs(mu[b]); });

            std::vector<Ritz> wanted;
            bool all_small = true;
            for (int w = 0; w < nev_; ++w) {
                const int i = order[w];
                ComplexVector y = es.eigenvectors().col(i);
                y.normalize();
                const double est = std::abs((H_.row(m) * y)(0));
                if (est > op_tol * std::abs(mu[i])) all_small = false;
                ComplexVector x = V_.leftCols(m) * y;
                x.normalize();
                wanted.push_back({mu[i], std::move(x), est});
            }
            if (all_small) {
                bool accepted = true;
                for (const auto& r : wanted) accepted = accepted && accept(r);
                best = wanted;
                if (accepted) {
                    *ok = true;
                    return best;
                }
                op_tol *= 1e-2;  // Krylov estimate passed but the true residual did not
            }
            best = std::move(wanted);
            if (restart == max_restarts) break;
            truncate();
            kept = keep_;
        }
        return best;
    }

private:
    /// Arnoldi steps from column `from` up to ncv.
    void extend(int from) {
        ComplexVector w(n_);
        for (int j = from; j < ncv_; ++j) {
            op_(V_.col(j), w);
            const double wnorm0 = w.norm();
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= j; ++i) {
                    const cplx h = V_.col(i).dot(w);
                    w -= h * V_.col(i);
                    H_(i, j) += h;
                }
            }
            double beta = w.norm();
            if (beta <= 1e-14 * wnorm0) {
                // Invariant subspace: continue with a fresh direction.
                std::mt19937 rng(12345u + static_cast<unsigned>(j));
                std::normal_distribution<double> nd;
                for (int i = 0; i < n_; ++i) w[i] = cplx(nd(rng), nd(rng));
                for (int pass = 0; pass < 2; ++pass) {
                    for (int i = 0; i <= j; ++i) w -= V_.col(i).dot(w) * V_.col(i);
                }
                // In a space of dimension j + 1 nothing is left; a zero column is harmless.
                const double fresh = w.norm();
                if (fresh > 1e-8) V_.col(j + 1) = w / fresh;
                else V_.col(j + 1).setZero();
                H_(j + 1, j) = 0.0;
                continue;
            }
            H_(j + 1, j) = beta;
            V_.col(j + 1) = w / beta;
        }
    }

    /// Krylov-Schur truncation to the leading `keep_` Schur vectors.
    void truncate() {
        const int m = ncv_;
        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(H_.topLeftCorner(m, m));
        Eigen::MatrixXcd T = schur.matrixT();
        Eigen::MatrixXcd Q = schur.matrixU();
        sort_schur_by_magnitude(T, Q);
        keep_ = std::min(m - 1, nev_ + (m - nev_) / 2);
        const Eigen::RowVectorXcd b = H_.row(m) * Q;
        Eigen::MatrixXcd Vk = V_.leftCols(m) * Q.leftCols(keep_);
        const ComplexVector last = V_.col(m);
        H_.setZero();
        H_.topLeftCorner(keep_, keep_) = T.topLeftCorner(keep_, keep_).triangularView<Eigen::Upper>();
        H_.row(keep_).head(keep_) = b.head(keep_);
        V_.leftCols(keep_) = Vk;
        V_.col(keep_) = last;
    }

    Operator op_;
    int n_;
    int nev_;
    int ncv_;
    int keep_ = 0;
    Eigen::MatrixXcd V_;
    Eigen::MatrixXcd H_;
};

/// Eigenpairs of S w = lambda M w nearest sigma.
/// Throws SingularMatrixError when S - sigma M cannot be factorised.
[[nodiscard]] inline ArnoldiResult shift_invert_arnoldi(const ComplexSparseMatrix& S, const ComplexSparseMatrix& M,
                                                        cplx sigma, const ArnoldiOptions& opts,
                                                        const RealSparseMatrix* l2_mass = nullptr,
                                                        const ComplexVector* start = nullptr) {
    const int n = static_cast<int>(S.rows());
    ComplexSparseMatrix shifted = S - sigma * M;
    const BandedLU lu(ComplexBandedMatrix::from_sparse(shifted));
    shifted.resize(0, 0);

    auto op = [&](const ComplexVector& x, ComplexVector& y) {
        y = M * x;
        lu.solve_in_place(y.data());
    };
    KrylovSchur ks(op, n, opts.nev, opts.ncv);

    auto to_pair = [&](const KrylovSchur::Ritz& r) {
        EigenPair p;
        p.lambda = sigma + 1.0 / r.mu;
        p.vector = r.x;
        p.residual = pair_residual(S, M, p.lambda, p.vector);
        return p;
    };
    auto accept = [&](const KrylovSchur::Ritz& r) { return to_pair(r).residual <= opts.tol; };

    ComplexVector v0 = start ? *start : ComplexVector::Ones(n);
    int restarts = 0;
    bool ok = false;
    const auto ritz = ks.run(v0, opts.tol, opts.max_restarts, accept, &restarts, &ok);

    ArnoldiResult result;
    result.restarts = restarts;
    for (const auto& r : ritz) {
        EigenPair p = to_pair(r);
        if (p.residual > opts.tol) continue;
        const double nrm = l2_mass ? l2_norm(*l2_mass, p.vector) : p.vector.norm();
        if (nrm > 0.0) p.vector /= nrm;
        result.pairs.push_back(std::move(p));
    }
    std::sort(result.pairs.begin(), result.pairs.end(), [&](const EigenPair& a, const EigenPair& b) {
        return std::abs(a.lambda - sigma) < std::abs(b.lambda - sigma);
    });
    result.converged = ok && static_cast<int>(result.pairs.size()) >= std::min(opts.nev, n);
    if (!result.converged) {
        result.message = "shift (" + std::to_string(sigma.real()) + ", " + std::to_string(sigma.imag()) +
                         "): " + std::to_string(result.pairs.size()) + " of " + std::to_string(opts.nev) +
                         " pairs converged after " + std::to_string(restarts) + " restarts";
    }
    return result;
}

/// Merges eigenpairs, dropping a pair when a kept one lies within
/// 1e-6 (1 + |lambda|); the pair with the smaller residual wins.
inline void merge_pairs(std::vector<EigenPair>& into, std::vector<EigenPair> from, double rel = 1e-6) {
    for (auto& p : from) {
        bool dup = false;
        for (auto& q : into) {
            if (std::abs(p.lambda - q.lambda) < rel * (1.0 + std::abs(q.lambda))) {
                if (p.residual < q.residual) q = std::move(p);
                dup = true;
                break;
            }
        }
        if (!dup) into.push_back(std::move(p));
    }
}

}  // namespace rlm
