/**
 * @file assembly.hpp
 * @brief Sesquilinear forms of the complex-scaled Helmholtz operators on a P2 mesh.
 *
 * With a piecewise-constant scaling s(x) the strong equation
 *     s d/dx (s du/dx) + d2u/dy2 + lambda gamma u = 0
 * is multiplied by s^{-1} v and integrated, giving S u = lambda M u with
 *     S = int s dx(u) dx(v) + s^{-1} dy(u) dy(v),    M = int gamma s^{-1} u v.
 * No conjugation is applied to the (real) basis, so S and M are complex symmetric.
 * Neumann walls are natural; nodes on x = +-X are eliminated (Dirichlet).
 */
#pragma once

#include <Eigen/Sparse>

#include <complex>
#include <functional>
#include <vector>

#include "rlm/element.hpp"
#include "rlm/errors.hpp"
#include "rlm/mesh.hpp"
#include "rlm/model.hpp"

namespace rlm {

using ComplexSparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor, int>;
using RealSparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using ComplexVector = Eigen::VectorXcd;

/// Mesh node <-> matrix unknown. Unknowns keep the lexicographic node order.
struct DofMap {
    std::vector<int> dof_of_node;  ///< -1 for Dirichlet nodes
    std::vector<int> node_of_dof;

    [[nodiscard]] int size() const { return static_cast<int>(node_of_dof.size()); }
};

[[nodiscard]] inline DofMap make_dof_map(const Mesh& mesh) {
    DofMap map;
    map.dof_of_node.assign(mesh.num_nodes(), -1);
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        const int col = n / mesh.ny;
        if (col == 0 || col == mesh.nx - 1) continue;
        map.dof_of_node[n] = map.size();
        map.node_of_dof.push_back(n);
    }
    return map;
}

struct AssembledOperator {
    ComplexSparseMatrix S;  ///< gradient terms
    ComplexSparseMatrix M;  ///< gamma-weighted mass
    DofMap dofs;
};

namespace detail {

/// Scaling value on element e; throws when the element straddles x = +-L.
inline cplx element_scaling(const Mesh& mesh, int e, const ScalingProfile& profile) {
    const auto& t = mesh.triangles[e];
    const double L = profile.pml_start;
    auto side = [L](double x) {
        const double tol = 1e-12 * (1.0 + std::abs(L));
        if (x < -L - tol) return -1;
        if (x > L + tol) return 1;
        if (x > -L + tol && x < L - tol) return 0;
        return 2;  // on an interface
    };
    int s = 2;
    for (int v = 0; v < 3; ++v) {
        const int sv = side(mesh.nodes[t[v]][0]);
        if (sv == 2) continue;
        if (s == 2) s = sv;
        else if (s != sv) throw MeshError("element straddles a scaling interface x = +-L");
    }
    const auto c = mesh.centroid(e);
    return profile.value(c[0]);
}

template <class Coef>
void add_element(std::vector<Eigen::Triplet<Coef>>& trip, const DofMap& dofs,
                 const std::array<int, 6>& nodes, const std::array<std::array<Coef, 6>, 6>& ke) {
    for (int a = 0; a < 6; ++a) {
        const int r = dofs.dof_of_node[nodes[a]];
        if (r < 0) continue;
        for (int b = 0; b < 6; ++b) {
            const int c = dofs.dof_of_node[nodes[b]];
            if (c < 0) continue;
            trip.emplace_back(r, c, ke[a][b]);
        }
    }
}

}  // namespace detail

[[nodiscard]] inline AssembledOperator assemble_operator(const Mesh& mesh, const ScalingProfile& profile) {
    AssembledOperator op;
    op.dofs = make_dof_map(mesh);
    const int n = op.dofs.size();
    std::vector<Eigen::Triplet<cplx>> ts;
    std::vector<Eigen::Triplet<cplx>> tm;
    ts.reserve(static_cast<std::size_t>(mesh.num_elements()) * 36);
    tm.reserve(static_cast<std::size_t>(mesh.num_elements()) * 36);

    for (int e = 0; e < mesh.num_elements(); ++e) {
        const cplx s = detail::element_scaling(mesh, e, profile);
        const cplx sinv = 1.0 / s;
        const double g = mesh.element_gamma[e];
        const auto map = mesh.affine(e);
        const double area = map.area();

        std::array<std::array<cplx, 6>, 6> ke{};
        std::array<std::array<cplx, 6>, 6> me{};
        for (const auto& q : p2::triangle_rule_deg4) {
            const auto phi = p2::shape(q.xi, q.eta);
            const auto gref = p2::shape_grad_ref(q.xi, q.eta);
            std::array<std::array<double, 2>, 6> grad{};
            for (int a = 0; a < 6; ++a) grad[a] = map.grad(gref[a]);
            const double w = q.weight * area;
            for (int a = 0; a < 6; ++a) {
                for (int b = 0; b < 6; ++b) {
                    ke[a][b] += w * (s * (grad[a][0] * grad[b][0]) + sinv * (grad[a][1] * grad[b][1]));
                    me[a][b] += w * g * sinv * (phi[a] * phi[b]);
                }
            }
        }
        detail::add_element(ts, op.dofs, mesh.triangles[e], ke);
        detail::add_element(tm, op.dofs, mesh.triangles[e], me);
    }
    op.S.resize(n, n);
    op.M.resize(n, n);
    op.S.setFromTriplets(ts.begin(), ts.end());
    op.M.setFromTriplets(tm.begin(), tm.end());
    op.S.makeCompressed();
    op.M.makeCompressed();
    return op;
}

/// Unweighted, unscaled mass matrix: u^H M0 u is the L2 norm squared of the
/// finite element function over the whole computational domain.
[[nodiscard]] inline RealSparseMatrix assemble_l2_mass(const Mesh& mesh, const DofMap& dofs) {
    std::vector<Eigen::Triplet<double>> tm;
    tm.reserve(static_cast<std::size_t>(mesh.num_elements()) * 36);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double area = mesh.affine(e).area();
        std::array<std::array<double, 6>, 6> me{};
        for (const auto& q : p2::triangle_rule_deg4) {
            const auto phi = p2::shape(q.xi, q.eta);
            for (int a = 0; a < 6; ++a) {
                for (int b = 0; b < 6; ++b) me[a][b] += q.weight * area * phi[a] * phi[b];
            }
        }
        detail::add_element(tm, dofs, mesh.triangles[e], me);
    }
    RealSparseMatrix m(dofs.size(), dofs.size());
    m.setFromTriplets(tm.begin(), tm.end());
    m.makeCompressed();
    return m;
}

/// Incident field u_i = sum_n a_n w_n^+ evaluated at (x, y).
[[nodiscard]] inline cplx incident_field(double k, const std::vector<cplx>& incident, double x, double y) {
    cplx u = 0.0;
    for (std::size_t n = 0; n < incident.size(); ++n) {
        if (incident[n] == cplx(0.0)) continue;
        u += incident[n] * mode_field(static_cast<int>(n), ModeSign::Plus, k, x, y);
    }
    return u;
}

/// Load vector F_i = int k^2 (1 - gamma) u_i phi_i over the obstacle, where the
/// scaling is 1. The scattered field then solves (S - k^2 M) v = -F.
[[nodiscard]] inline ComplexVector assemble_scattering_rhs(const Mesh& mesh, const DofMap& dofs, double k,
                                                           const std::vector<cplx>& incident) {
    ComplexVector f = ComplexVector::Zero(dofs.size());
    // Quadrature on a finer rule than the matrices since u_i is not polynomial:
    // each element is integrated with the degree-4 rule on its 4 midpoint subtriangles.
    static constexpr std::array<std::array<double, 6>, 4> sub{{
        {0.0, 0.0, 0.5, 0.0, 0.0, 0.5},
        {0.5, 0.0, 1.0, 0.0, 0.5, 0.5},
        {0.0, 0.5, 0.5, 0.5, 0.0, 1.0},
        {0.5, 0.5, 0.0, 0.5, 0.5, 0.0},
    }};
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double g = mesh.element_gamma[e];
        if (g == 1.0) continue;
        const auto map = mesh.affine(e);
        const double area = map.area();
        std::array<cplx, 6> fe{};
        for (const auto& st : sub) {
            for (const auto& q : p2::triangle_rule_deg4) {
                // sub-triangle vertices in reference coordinates
                const double xi = st[0] + (st[2] - st[0]) * q.xi + (st[4] - st[0]) * q.eta;
                const double eta = st[1] + (st[3] - st[1]) * q.xi + (st[5] - st[1]) * q.eta;
                const auto p = map.to_physical(xi, eta);
                const cplx ui = incident_field(k, incident, p[0], p[1]);
                const auto phi = p2::shape(xi, eta);
                const cplx c = (0.25 * q.weight * area * k * k * (1.0 - g)) * ui;
                for (int a = 0; a < 6; ++a) fe[a] += c * phi[a];
            }
        }
        for (int a = 0; a < 6; ++a) {
            const int r = dofs.dof_of_node[mesh.triangles[e][a]];
            if (r >= 0) f[r] += fe[a];
        }
    }
    return f;
}

/// Nodal values of f at the unknowns.
[[nodiscard]] inline ComplexVector interpolate(const Mesh& mesh, const DofMap& dofs,
                                               const std::function<cplx(double, double)>& f) {
    ComplexVector v(dofs.size());
    for (int d = 0; d < dofs.size(); ++d) {
        const auto& p = mesh.nodes[dofs.node_of_dof[d]];
        v[d] = f(p[0], p[1]);
    }
    return v;
}

/// Full nodal vector (zeros on Dirichlet nodes) from an unknown vector.
[[nodiscard]] inline ComplexVector expand_to_nodes(const DofMap& dofs, const ComplexVector& v) {
    ComplexVector u = ComplexVector::Zero(static_cast<Eigen::Index>(dofs.dof_of_node.size()));
    for (int d = 0; d < dofs.size(); ++d) u[dofs.node_of_dof[d]] = v[d];
    return u;
}

/// PT map on unknowns: (PT v)(x, y) = conj(v(-x, y)).
[[nodiscard]] inline ComplexVector apply_pt_map(const ComplexVector& v, const Mesh& mesh) {
    if (!geometric_mirror_check(mesh)) throw MeshError("PT map requires a mirror-symmetric mesh");
    const DofMap dofs = make_dof_map(mesh);
    if (v.size() != dofs.size()) throw MeshError("vector size does not match the mesh unknowns");
    ComplexVector out(v.size());
    for (int d = 0; d < dofs.size(); ++d) {
        const int m = dofs.dof_of_node[mesh.mirror_node(dofs.node_of_dof[d])];
        out[d] = std::conj(v[m]);
    }
    return out;
}

/// Mirror permutation on unknowns: perm[d] is the unknown at the mirrored node.
[[nodiscard]] inline std::vector<int> mirror_permutation(const Mesh& mesh, const DofMap& dofs) {
    std::vector<int> perm(dofs.size());
    for (int d = 0; d < dofs.size(); ++d) perm[d] = dofs.dof_of_node[mesh.mirror_node(dofs.node_of_dof[d])];
    return perm;
}

}  // namespace rlm
