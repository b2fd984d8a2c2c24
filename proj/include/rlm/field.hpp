/**
 * @file field.hpp
 * @brief Evaluation of P2 nodal fields: point values and gradients, traces on
 *        vertical gridlines, modal projections and longitudinal flux.
 */
#pragma once

#include <array>
#include <complex>
#include <vector>

#include "rlm/assembly.hpp"
#include "rlm/element.hpp"
#include "rlm/mesh.hpp"
#include "rlm/model.hpp"

namespace rlm {

struct PointValue {
    cplx value;
    cplx dx;
    cplx dy;
};

/// Value and gradient of a nodal field (one entry per mesh node) in element e.
[[nodiscard]] inline PointValue evaluate_in_element(const Mesh& mesh, const ComplexVector& nodal, int e,
                                                    double x, double y) {
    const auto map = mesh.affine(e);
    const auto ref = map.to_reference(x, y);
    const auto phi = p2::shape(ref[0], ref[1]);
    const auto gref = p2::shape_grad_ref(ref[0], ref[1]);
    PointValue pv{0.0, 0.0, 0.0};
    for (int a = 0; a < 6; ++a) {
        const cplx u = nodal[mesh.triangles[e][a]];
        const auto g = map.grad(gref[a]);
        pv.value += u * phi[a];
        pv.dx += u * g[0];
        pv.dy += u * g[1];
    }
    return pv;
}

[[nodiscard]] inline PointValue evaluate(const Mesh& mesh, const ComplexVector& nodal, double x, double y,
                                         int side = +1) {
    return evaluate_in_element(mesh, nodal, mesh.locate(x, y, side), x, y);
}

namespace detail {

inline int require_column(const Mesh& mesh, double x) {
    const auto col = mesh.column_at(x);
    if (!col) throw MeshError("no vertical gridline at x = " + std::to_string(x));
    if (*col % 2 != 0) throw MeshError("gridline at x = " + std::to_string(x) + " is not a vertex line");
    return *col;
}

}  // namespace detail

/// int_0^1 u(x, y) phi_n(y) dy along the vertex gridline at x.
/// The P2 trace on the gridline is the 1D quadratic through the three edge nodes.
[[nodiscard]] inline cplx trace_projection(const Mesh& mesh, const ComplexVector& nodal, double x, int n) {
    const int col = detail::require_column(mesh, x);
    cplx acc = 0.0;
    for (int b = 0; b + 1 < static_cast<int>(mesh.y_lines.size()); ++b) {
        const double y0 = mesh.y_lines[b];
        const double y1 = mesh.y_lines[b + 1];
        const cplx u0 = nodal[mesh.node_index(col, 2 * b)];
        const cplx um = nodal[mesh.node_index(col, 2 * b + 1)];
        const cplx u1 = nodal[mesh.node_index(col, 2 * b + 2)];
        for (const auto& g : p2::gauss5) {
            const double s = g.s;
            const cplx u = u0 * ((1.0 - s) * (1.0 - 2.0 * s)) + um * (4.0 * s * (1.0 - s)) + u1 * (s * (2.0 * s - 1.0));
            const double y = y0 + s * (y1 - y0);
            acc += g.weight * (y1 - y0) * u * ModalBasis::phi(n, y);
        }
    }
    return acc;
}

/// int_0^1 Im(conj(u) du/dx) dy on the gridline at x, with du/dx taken from
/// the elements on the given side (-1 left, +1 right).
[[nodiscard]] inline double trace_flux(const Mesh& mesh, const ComplexVector& nodal, double x, int side) {
    (void)detail::require_column(mesh, x);
    double acc = 0.0;
    for (int b = 0; b + 1 < static_cast<int>(mesh.y_lines.size()); ++b) {
        const double y0 = mesh.y_lines[b];
        const double y1 = mesh.y_lines[b + 1];
        for (const auto& g : p2::gauss5) {
            const double y = y0 + g.s * (y1 - y0);
            const auto pv = evaluate(mesh, nodal, x, y, side);
            acc += g.weight * (y1 - y0) * std::imag(std::conj(pv.value) * pv.dx);
        }
    }
    return acc;
}

/// L2 norm of an unknown vector over the computational domain.
[[nodiscard]] inline double l2_norm(const RealSparseMatrix& mass, const ComplexVector& v) {
    const ComplexVector mv = mass.cast<cplx>() * v;
    return std::sqrt(std::max(0.0, std::real(v.dot(mv))));
}

struct FieldSample {
    double x;
    double y;
    cplx u;
};

/// Field on a uniform (nx_samples x ny_samples) grid covering [x_min, x_max] x [0, 1].
[[nodiscard]] inline std::vector<FieldSample> sample_field(const Mesh& mesh, const ComplexVector& nodal,
                                                           double x_min, double x_max, int nx_samples,
                                                           int ny_samples) {
    std::vector<FieldSample> out;
    out.reserve(static_cast<std::size_t>(nx_samples) * ny_samples);
    for (int i = 0; i < nx_samples; ++i) {
        const double x = nx_samples == 1 ? x_min : x_min + (x_max - x_min) * i / (nx_samples - 1);
        for (int j = 0; j < ny_samples; ++j) {
            const double y = ny_samples == 1 ? 0.5 : static_cast<double>(j) / (ny_samples - 1);
            out.push_back({x, y, evaluate(mesh, nodal, x, y).value});
        }
    }
    return out;
}

}  // namespace rlm
