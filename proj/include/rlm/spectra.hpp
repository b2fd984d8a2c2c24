/**
 * @file spectra.hpp
 * @brief Resonance (classical scaling) and reflectionless (conjugated scaling)
 *        spectra: eigenvalues near requested wavenumbers, essential-branch
 *        filtering, trapped/reflectionless classification, modal indicators
 *        and conjugation pairing.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rlm/assembly.hpp"
#include "rlm/eigensolver.hpp"
#include "rlm/field.hpp"
#include "rlm/mesh.hpp"
#include "rlm/model.hpp"

namespace rlm {

enum class OperatorKind {
    Resonance,       ///< classical scaling in both leads
    Reflectionless,  ///< ingoing scaling on the left, outgoing on the right
};

[[nodiscard]] inline ScalingKind scaling_for(OperatorKind kind) {
    return kind == OperatorKind::Resonance ? ScalingKind::OutgoingBoth : ScalingKind::IngoingLeftOutgoingRight;
}

[[nodiscard]] inline std::string to_string(OperatorKind kind) {
    return kind == OperatorKind::Resonance ? "resonance" : "reflectionless";
}

enum class Classification {
    Trapped,
    ReflectionlessMode,
    ComplexResonance,
    ComplexReflectionless,
    EssentialArtifact,
    Unreliable,  ///< residual above the solver tolerance
};

[[nodiscard]] inline std::string to_string(Classification c) {
    switch (c) {
        case Classification::Trapped: return "trapped";
        case Classification::ReflectionlessMode: return "reflectionless_mode";
        case Classification::ComplexResonance: return "complex_resonance";
        case Classification::ComplexReflectionless: return "complex_reflectionless";
        case Classification::EssentialArtifact: return "essential_artifact";
        case Classification::Unreliable: return "unreliable";
    }
    return "?";
}

[[nodiscard]] inline std::optional<Classification> classification_from_string(const std::string& s) {
    for (auto c : {Classification::Trapped, Classification::ReflectionlessMode, Classification::ComplexResonance,
                   Classification::ComplexReflectionless, Classification::EssentialArtifact,
                   Classification::Unreliable}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

/// Wavenumber from an eigenvalue: principal square root, Re k >= 0.
[[nodiscard]] inline cplx wavenumber(cplx lambda) { return std::sqrt(lambda); }

/// Mesh, operator and L2 mass for one problem and scaling kind.
struct Discretization {
    WaveguideProblem problem;
    MeshOptions mesh_options;
    ScalingProfile profile;
    Mesh mesh;
    AssembledOperator op;
    RealSparseMatrix l2_mass;

    static Discretization build(const WaveguideProblem& problem, ScalingKind kind, const MeshOptions& mesh_options) {
        Discretization d;
        d.problem = problem;
        d.mesh_options = mesh_options;
        d.profile = ScalingProfile{kind, problem.theta, problem.pml_start};
        d.mesh = build_structured_mesh(problem, mesh_options);
        d.op = assemble_operator(d.mesh, d.profile);
        d.l2_mass = assemble_l2_mass(d.mesh, d.op.dofs);
        return d;
    }

    [[nodiscard]] double h() const { return std::max(mesh_options.hx, mesh_options.hy); }
    [[nodiscard]] int num_dofs() const { return op.dofs.size(); }
    [[nodiscard]] ComplexVector nodal(const ComplexVector& unknowns) const {
        return expand_to_nodes(op.dofs, unknowns);
    }
};

/// Distance in the lambda-plane from lambda to the essential branches
/// n^2 pi^2 + t e^{-2i theta} (and, for the reflectionless kind, n^2 pi^2 + t e^{+2i theta}), n <= n_max.
[[nodiscard]] inline double essential_distance(cplx lambda, double theta, OperatorKind kind, int n_max) {
    auto ray = [&](double origin, cplx dir) {
        const cplx d = lambda - origin;
        const double t = std::real(d * std::conj(dir));
        return t <= 0.0 ? std::abs(d) : std::abs(d - t * dir);
    };
    double best = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= n_max; ++n) {
        const double origin = n * n * pi * pi;
        best = std::min(best, ray(origin, std::polar(1.0, -2.0 * theta)));
        if (kind == OperatorKind::Reflectionless) best = std::min(best, ray(origin, std::polar(1.0, 2.0 * theta)));
    }
    return best;
}

/// Whether arg(lambda) lies in the sector holding the spectrum, widened by `slack`
/// radians: [-2 theta, 0] for resonances, [-2 theta, 2 theta] for the reflectionless kind.
[[nodiscard]] inline bool in_sector(cplx lambda, double theta, OperatorKind kind, double slack) {
    const double a = std::arg(lambda);
    const double upper = kind == OperatorKind::Resonance ? 0.0 : 2.0 * theta;
    return a >= -2.0 * theta - slack && a <= upper + slack;
}

/// Smallest n_max that covers every branch relevant near lambda.
[[nodiscard]] inline int branch_count_for(cplx lambda) {
    return static_cast<int>(std::ceil(std::sqrt(std::abs(lambda)) / pi)) + 2;
}

/// Coefficients a_n = int_0^1 w(-L, y) phi_n(y) dy, n = 0..N, for a real wavenumber k.
[[nodiscard]] inline std::vector<cplx> incident_coefficients(const Discretization& disc, const ComplexVector& mode,
                                                             double k) {
    const int N = propagating_index(k);
    const ComplexVector nodal = disc.nodal(mode);
    std::vector<cplx> a(N + 1);
    for (int n = 0; n <= N; ++n) a[n] = trace_projection(disc.mesh, nodal, -disc.problem.pml_start, n);
    return a;
}

/// rho(w) = sum_{n <= N} |a_n|^2 for a mode of unit L2 norm.
[[nodiscard]] inline double rho_indicator(const Discretization& disc, const ComplexVector& mode, double k) {
    double rho = 0.0;
    for (const cplx& a : incident_coefficients(disc, mode, k)) rho += std::norm(a);
    return rho;
}

/// |flux through x = L - flux through x = -L|, flux = int Im(conj(u) du/dx) dy,
/// with derivatives from the unscaled region |x| < L.
[[nodiscard]] inline double flux_defect(const Discretization& disc, const ComplexVector& mode) {
    const ComplexVector nodal = disc.nodal(mode);
    const double L = disc.problem.pml_start;
    return std::abs(trace_flux(disc.mesh, nodal, L, -1) - trace_flux(disc.mesh, nodal, -L, +1));
}

struct SpectrumOptions {
    int nev = 8;
    int ncv = 0;
    double tol = 1e-8;
    int max_restarts = 60;
    /// |Im k| below which k^2 is treated as real. Converged real eigenvalues sit
    /// below 1e-5, while genuinely complex ones occur at |Im k| ~ 5e-3.
    double real_tol = 1e-3;
    double rho_tol = 1e-6;         ///< rho at or below which a real mode is trapped
    double artifact_factor = 10.0; ///< artifact_tol = factor * h^2 * max(1, |lambda|)
    int threads = 1;
};

struct SpectrumEntry {
    cplx k;
    cplx lambda;
    double residual = 0.0;
    double ess_distance = 0.0;
    std::optional<double> rho;
    Classification classification = Classification::Unreliable;
    ComplexVector vector;  ///< unknowns, unit L2 norm
};

/// Disc in the lambda-plane inside which a shift found every eigenvalue.
struct SearchDisc {
    cplx center;
    double radius;
};

struct SpectrumResult {
    OperatorKind operator_kind = OperatorKind::Reflectionless;
    double theta = pi / 4.0;
    std::vector<SpectrumEntry> entries;  ///< sorted by Re k, then Im k
    std::vector<SearchDisc> searched;
    std::vector<std::string> warnings;
    int num_dofs = 0;
};

[[nodiscard]] inline double artifact_tolerance(const SpectrumOptions& opts, double h, cplx lambda) {
    return opts.artifact_factor * h * h * std::max(1.0, std::abs(lambda));
}

/// Classification from residual, essential distance, k and rho.
[[nodiscard]] inline Classification classify_entry(const SpectrumEntry& e, OperatorKind kind, double tol,
                                                   double artifact_tol, double real_tol, double rho_tol) {
    if (e.residual > tol) return Classification::Unreliable;
    if (e.ess_distance <= artifact_tol) return Classification::EssentialArtifact;
    if (std::abs(e.k.imag()) <= real_tol) {
        if (e.rho && *e.rho > rho_tol) return Classification::ReflectionlessMode;
        return Classification::Trapped;
    }
    return kind == OperatorKind::Resonance ? Classification::ComplexResonance : Classification::ComplexReflectionless;
}

/// Fills ess_distance, rho and classification of an entry.
inline void annotate_entry(SpectrumEntry& e, const Discretization& disc, OperatorKind kind,
                           const SpectrumOptions& opts) {
    e.k = wavenumber(e.lambda);
    e.ess_distance = essential_distance(e.lambda, disc.problem.theta, kind, branch_count_for(e.lambda));
    e.rho.reset();
    if (std::abs(e.k.imag()) <= opts.real_tol) {
        try {
            e.rho = rho_indicator(disc, e.vector, e.k.real());
        } catch (const ThresholdError&) {
            // at a threshold rho is undefined
        }
    }
    e.classification = classify_entry(e, kind, opts.tol, artifact_tolerance(opts, disc.h(), e.lambda),
                                      opts.real_tol, opts.rho_tol);
}

/// Eigenvalues near each requested wavenumber (sigma = k^2), merged and annotated.
[[nodiscard]] inline SpectrumResult compute_spectrum(const Discretization& disc, OperatorKind kind,
                                                     const std::vector<cplx>& shifts, const SpectrumOptions& opts) {
    if (shifts.empty()) throw ConfigError("at least one shift is required");
    if (disc.profile.kind != scaling_for(kind)) throw ConfigError("discretization scaling does not match operator kind");

    SpectrumResult result;
    result.operator_kind = kind;
    result.theta = disc.problem.theta;
    result.num_dofs = disc.num_dofs();

    std::vector<ArnoldiResult> per_shift(shifts.size());
    std::vector<std::string> errors(shifts.size());
    ArnoldiOptions ao{opts.nev, opts.ncv, opts.tol, opts.max_restarts};

    auto work = [&](std::size_t i) {
        const cplx sigma = shifts[i] * shifts[i];
        try {
            per_shift[i] = shift_invert_arnoldi(disc.op.S, disc.op.M, sigma, ao, &disc.l2_mass);
        } catch (const SingularMatrixError&) {
            // The shift hit an eigenvalue: nudge it off.
            try {
                const cplx nudged = sigma * (1.0 + cplx(1e-7, 1e-7));
                per_shift[i] = shift_invert_arnoldi(disc.op.S, disc.op.M, nudged, ao, &disc.l2_mass);
            } catch (const std::exception& ex) {
                errors[i] = ex.what();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(shifts.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < shifts.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        std::mutex m;
        std::size_t next = 0;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i;
                    {
                        std::lock_guard<std::mutex> lock(m);
                        if (next >= shifts.size()) return;
                        i = next++;
                    }
                    work(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<EigenPair> merged;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        const cplx sigma = shifts[i] * shifts[i];
        if (!errors[i].empty()) {
            result.warnings.push_back("shift k=" + std::to_string(shifts[i].real()) + "+" +
                                      std::to_string(shifts[i].imag()) + "i failed: " + errors[i]);
            continue;
        }
        auto& r = per_shift[i];
        if (!r.converged) result.warnings.push_back(r.message);
        if (r.converged && !r.pairs.empty()) {
            double radius = 0.0;
            for (const auto& p : r.pairs) radius = std::max(radius, std::abs(p.lambda - sigma));
            result.searched.push_back({sigma, radius});
        }
        merge_pairs(merged, std::move(r.pairs));
    }

    for (auto& p : merged) {
        SpectrumEntry e;
        e.lambda = p.lambda;
        e.residual = p.residual;
        e.vector = std::move(p.vector);
        annotate_entry(e, disc, kind, opts);
        result.entries.push_back(std::move(e));
    }
    std::sort(result.entries.begin(), result.entries.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
        if (a.k.real() != b.k.real()) return a.k.real() < b.k.real();
        return a.k.imag() < b.k.imag();
    });
    return result;
}

/// Convenience overload building the discretization.
[[nodiscard]] inline SpectrumResult compute_spectrum(const WaveguideProblem& problem, OperatorKind kind,
                                                     const std::vector<cplx>& shifts, const SpectrumOptions& opts,
                                                     const MeshOptions& mesh_options) {
    const auto disc = Discretization::build(problem, scaling_for(kind), mesh_options);
    return compute_spectrum(disc, kind, shifts, opts);
}

struct PairingReport {
    bool symmetric_coefficient = false;  ///< gamma even in x
    int complex_checked = 0;
    int complex_matched = 0;
    int real_entries = 0;
    std::vector<cplx> unmatched;  ///< k values without a conjugate partner
    [[nodiscard]] bool passes() const { return complex_checked > 0 && unmatched.empty(); }
};

/// Matches every complex (non-artifact) entry with a partner near its conjugate.
/// Entries whose conjugate lies outside every searched disc are not checked.
[[nodiscard]] inline PairingReport conjugation_pairing(const SpectrumResult& result, const WaveguideProblem& problem,
                                                       double pair_tol = 1e-3) {
    PairingReport rep;
    rep.symmetric_coefficient = problem.gamma_is_even();
    auto usable = [](const SpectrumEntry& e) {
        return e.classification != Classification::EssentialArtifact &&
               e.classification != Classification::Unreliable;
    };
    for (const auto& e : result.entries) {
        if (!usable(e)) continue;
        if (e.classification == Classification::Trapped || e.classification == Classification::ReflectionlessMode) {
            ++rep.real_entries;
            continue;
        }
        const cplx target = std::conj(e.lambda);
        bool covered = false;
        for (const auto& d : result.searched) {
            if (std::abs(target - d.center) < 0.9 * d.radius) covered = true;
        }
        if (!covered) continue;
        ++rep.complex_checked;
        bool found = false;
        for (const auto& f : result.entries) {
            if (std::abs(f.k - std::conj(e.k)) <= pair_tol) found = true;
        }
        if (found) ++rep.complex_matched;
        else rep.unmatched.push_back(e.k);
    }
    return rep;
}

struct BranchPoint {
    int n;
    int side;  ///< -1 for e^{-2i theta}, +1 for e^{+2i theta}
    cplx k;
};

/// Samples sqrt of the essential branches in the k-plane for t in [0, t_max].
[[nodiscard]] inline std::vector<BranchPoint> sample_branches(double theta, OperatorKind kind, int n_max,
                                                              double t_max, int samples) {
    std::vector<BranchPoint> out;
    for (int n = 0; n <= n_max; ++n) {
        for (int side : {-1, +1}) {
            if (side > 0 && kind == OperatorKind::Resonance) continue;
            const cplx dir = std::polar(1.0, 2.0 * side * theta);
            for (int i = 0; i < samples; ++i) {
                const double t = t_max * i / std::max(1, samples - 1);
                out.push_back({n, side, wavenumber(n * n * pi * pi + t * dir)});
            }
        }
    }
    return out;
}

}  // namespace rlm
