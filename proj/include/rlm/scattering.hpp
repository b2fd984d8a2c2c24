/**
 * @file scattering.hpp
 * @brief Scattering by the obstacle with outgoing scaling in both leads: modal
 *        coefficients of the scattered field, reflection matrix, energy balance,
 *        |R00| sweeps and the closed-form 1D slab reflection.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "rlm/assembly.hpp"
#include "rlm/banded.hpp"
#include "rlm/field.hpp"
#include "rlm/model.hpp"
#include "rlm/spectra.hpp"

namespace rlm {

/// Factorised S - k^2 M for one real wavenumber.
class ScatteringSolver {
public:
    ScatteringSolver(const Discretization& disc, double k) : disc_(&disc), k_(k) {
        if (disc.profile.kind != ScalingKind::OutgoingBoth) {
            throw ConfigError("scattering requires the outgoing scaling in both leads");
        }
        N_ = propagating_index(k);
        ComplexSparseMatrix a = disc.op.S - cplx(k * k) * disc.op.M;
        try {
            lu_.emplace(ComplexBandedMatrix::from_sparse(a));
        } catch (const SingularMatrixError&) {
            throw NumericalError("scattering system singular at k = " + std::to_string(k) +
                                 " (close to a trapped mode?)");
        }
    }

    [[nodiscard]] int propagating() const { return N_; }
    [[nodiscard]] double k() const { return k_; }

    /// Scattered field (unknowns); equals the physical scattered field on |x| < L.
    [[nodiscard]] ComplexVector solve(const std::vector<cplx>& incident) const {
        if (static_cast<int>(incident.size()) != N_ + 1) {
            throw ConfigError("incident coefficient list must have N + 1 = " + std::to_string(N_ + 1) + " entries");
        }
        ComplexVector f = assemble_scattering_rhs(disc_->mesh, disc_->op.dofs, k_, incident);
        if (f.squaredNorm() == 0.0) return ComplexVector::Zero(f.size());
        f = -f;
        lu_->solve_in_place(f.data());
        return f;
    }

private:
    const Discretization* disc_;
    double k_;
    int N_ = 0;
    std::optional<BandedLU> lu_;
};

/// Scattered field for u_i = sum_n a_n w_n^+ (one banded LU solve).
[[nodiscard]] inline ComplexVector solve_scattering(const Discretization& disc, double k,
                                                    const std::vector<cplx>& incident) {
    return ScatteringSolver(disc, k).solve(incident);
}

enum class Side { Left, Right };

/// Complex coordinate of the classical scaling at a real x.
[[nodiscard]] inline cplx stretched_coordinate(double x, double L, double theta) {
    if (std::abs(x) < L) return x;
    const cplx eta = std::polar(1.0, theta);
    return x < 0.0 ? -L + (x + L) * eta : L + (x - L) * eta;
}

/// Modal coefficients b_p^- (left) or b_p^+ (right), p = 0..p_max, of a
/// scattered field given on the nodes. The trace on the gridline x = -+L (shifted
/// by `offset_cells` vertex columns outward, negative values move inward) is
/// projected on phi_p and divided by the value of w_p^{-+} there; outward lines
/// use the stretched coordinate. Threshold modes are reported as NaN.
[[nodiscard]] inline std::vector<cplx> extract_coefficients(const Discretization& disc, const ComplexVector& nodal,
                                                            double k, Side side, int p_max, int offset_cells = 0) {
    const double L = disc.problem.pml_start;
    const auto base = disc.mesh.column_at(side == Side::Left ? -L : L);
    if (!base) throw MeshError("no gridline at the scaling interface");
    const int step = side == Side::Left ? -2 : 2;
    const int col = *base + step * offset_cells;
    if (col <= 0 || col >= disc.mesh.nx - 1) throw MeshError("extraction line outside the mesh");
    const double x = disc.mesh.nodes[disc.mesh.node_index(col, 0)][0];
    const cplx xs = stretched_coordinate(x, L, disc.problem.theta);
    const double sgn = side == Side::Left ? -1.0 : 1.0;

    std::vector<cplx> b(p_max + 1);
    for (int p = 0; p <= p_max; ++p) {
        const cplx beta = beta_n(k, p);
        if (std::abs(beta) < disc.problem.threshold_tol) {
            b[p] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
            continue;
        }
        const cplx scalar = std::exp(cplx(0.0, sgn) * beta * xs) / std::sqrt(2.0 * std::abs(beta));
        b[p] = trace_projection(disc.mesh, nodal, x, p) / scalar;
    }
    return b;
}

struct ScatteringResult {
    double k = 0.0;
    int N = 0;
    int P = 0;
    Eigen::MatrixXcd s_minus;  ///< (N+1) x (P+1): row n = incidence, column p = mode
    Eigen::MatrixXcd s_plus;
    double energy_defect = 0.0;

    /// R(k) = s_minus restricted to p <= N.
    [[nodiscard]] Eigen::MatrixXcd reflection() const { return s_minus.leftCols(N + 1); }
    /// t_np = delta_np + s_plus_np, p <= N.
    [[nodiscard]] Eigen::MatrixXcd transmission() const {
        return Eigen::MatrixXcd::Identity(N + 1, N + 1) + s_plus.leftCols(N + 1);
    }
};

/// max_n | sum_{p <= N} (|R_np|^2 + |t_np|^2) - 1 |.
[[nodiscard]] inline double energy_defect(const Eigen::MatrixXcd& R, const Eigen::MatrixXcd& t) {
    double worst = 0.0;
    for (Eigen::Index n = 0; n < R.rows(); ++n) {
        const double total = R.row(n).squaredNorm() + t.row(n).squaredNorm();
        worst = std::max(worst, std::abs(total - 1.0));
    }
    return worst;
}

/// Reflection/transmission data from N + 1 solves sharing one factorisation.
/// p_max defaults to N + 5 (evanescent coefficients are diagnostics).
[[nodiscard]] inline ScatteringResult reflection_matrix(const Discretization& disc, double k, int p_max = -1) {
    const ScatteringSolver solver(disc, k);
    ScatteringResult res;
    res.k = k;
    res.N = solver.propagating();
    res.P = p_max >= 0 ? std::max(p_max, res.N) : res.N + 5;
    res.s_minus.resize(res.N + 1, res.P + 1);
    res.s_plus.resize(res.N + 1, res.P + 1);
    for (int n = 0; n <= res.N; ++n) {
        std::vector<cplx> a(res.N + 1, 0.0);
        a[n] = 1.0;
        const ComplexVector nodal = disc.nodal(solver.solve(a));
        const auto bm = extract_coefficients(disc, nodal, k, Side::Left, res.P);
        const auto bp = extract_coefficients(disc, nodal, k, Side::Right, res.P);
        for (int p = 0; p <= res.P; ++p) {
            res.s_minus(n, p) = bm[p];
            res.s_plus(n, p) = bp[p];
        }
    }
    res.energy_defect = energy_defect(res.reflection(), res.transmission());
    return res;
}

struct SweepPoint {
    double k = 0.0;
    cplx r00 = 0.0;
    double energy_defect = 0.0;
    bool skipped = false;
    std::string note;
};

/// |R00| on k_min, k_min + step, ..., k_max. Points within 1e-3 of a threshold
/// or of a listed trapped wavenumber are flagged and skipped. Points are
/// independent; `threads` workers share them.
[[nodiscard]] inline std::vector<SweepPoint> sweep_r00(const Discretization& disc, double k_min, double k_max,
                                                       double step, const std::vector<double>& trapped = {},
                                                       int threads = 1) {
    if (!(step > 0.0) || !(k_max >= k_min) || !(k_min > 0.0)) throw ConfigError("invalid sweep range");
    const int count = static_cast<int>(std::floor((k_max - k_min) / step + 1e-9)) + 1;
    std::vector<SweepPoint> out(count);
    auto work = [&](int i) {
        const double k = k_min + step * i;
        SweepPoint pt;
        pt.k = k;
        const double r = k / pi;
        if (std::abs(r - std::round(r)) * pi < 1e-3) {
            pt.skipped = true;
            pt.note = "threshold";
        }
        for (double kt : trapped) {
            if (std::abs(k - kt) < 1e-3) {
                pt.skipped = true;
                pt.note = "trapped";
            }
        }
        if (!pt.skipped) {
            try {
                const auto res = reflection_matrix(disc, k);
                pt.r00 = res.s_minus(0, 0);
                pt.energy_defect = res.energy_defect;
            } catch (const NumericalError& e) {
                pt.skipped = true;
                pt.note = e.what();
            }
        }
        out[i] = pt;
    };
    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) work(i);
        return out;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) work(i);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

/// Amplitudes a_n, n <= N, of the incoming part u_i = sum a_n w_n^+ of a mode
/// of the reflectionless operator, read off its trace at x = -L.
[[nodiscard]] inline std::vector<cplx> mode_incident_amplitudes(const Discretization& disc, const ComplexVector& mode,
                                                                double k) {
    auto a = incident_coefficients(disc, mode, k);
    const double L = disc.problem.pml_start;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const cplx beta = beta_n(k, static_cast<int>(n));
        a[n] /= std::exp(cplx(0.0, -1.0) * beta * L) / std::sqrt(2.0 * std::abs(beta));
    }
    return a;
}

/// |b_p^-|, p <= N, when the amplitudes `incident` are sent on the obstacle.
/// For a reflectionless mode every entry vanishes up to discretisation error.
[[nodiscard]] inline std::vector<double> reflected_moduli(const Discretization& outgoing,
                                                          const std::vector<cplx>& incident, double k) {
    const ComplexVector nodal = outgoing.nodal(solve_scattering(outgoing, k, incident));
    const auto b = extract_coefficients(outgoing, nodal, k, Side::Left, static_cast<int>(incident.size()) - 1);
    std::vector<double> out;
    for (const auto& x : b) out.push_back(std::abs(x));
    return out;
}

/// Reflection of the piston mode by a full-height slab gamma = c on (-w, w),
/// phases referred to x = 0 as in the 2D extraction:
///   R = e^{-2ikw} r (1 - e^{2i q d}) / (1 - r^2 e^{2i q d}),  r = (1 - sqrt c)/(1 + sqrt c),
/// q = k sqrt(c), d = 2w.
[[nodiscard]] inline cplx slab_oracle_r00(double k, double c, double half_width) {
    const double n = std::sqrt(c);
    const double r = (1.0 - n) / (1.0 + n);
    const cplx e = std::exp(cplx(0.0, 2.0 * k * n * 2.0 * half_width));
    return std::exp(cplx(0.0, -2.0 * k * half_width)) * r * (1.0 - e) / (1.0 - r * r * e);
}

}  // namespace rlm
