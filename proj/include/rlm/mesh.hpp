/**
 * @file mesh.hpp
 * @brief Structured, mirror-symmetric P2 triangulation of the truncated strip
 *        (-X, X) x (0, 1).
 *
 * Vertex gridlines contain x = 0, +-L, +-X and every gamma-block edge (plus its
 * mirror image), so each element lies on one side of every coefficient jump and
 * of the scaling interfaces. Each grid cell is cut along one diagonal: "/" for
 * cells right of x = 0, "\" for cells left of it, which makes the triangulation
 * exactly symmetric under x -> -x.
 *
 * Nodes form a (2W+1) x (2H+1) lattice (vertices, edge midpoints and cell
 * centres) numbered column by column, node(i, j) = i * ny + j. With this
 * ordering assembled matrices are banded with half-bandwidth 2 * ny + 2.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rlm/element.hpp"
#include "rlm/errors.hpp"
#include "rlm/model.hpp"

namespace rlm {

enum class Region { Interior, PmlLeft, PmlRight };

[[nodiscard]] inline const char* to_string(Region r) {
    switch (r) {
        case Region::Interior: return "interior";
        case Region::PmlLeft: return "pml_left";
        case Region::PmlRight: return "pml_right";
    }
    return "?";
}

struct MeshOptions {
    double hx = 0.05;
    double hy = 0.05;
};

struct Mesh {
    std::vector<double> x_lines;  ///< vertex gridlines in x (W + 1 values)
    std::vector<double> y_lines;  ///< vertex gridlines in y (H + 1 values)
    int nx = 0;                   ///< node columns, 2W + 1
    int ny = 0;                   ///< node rows, 2H + 1
    double pml_start = 0.0;
    double truncation = 0.0;

    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 6>> triangles;  ///< v0 v1 v2 m01 m12 m20, counter-clockwise
    std::vector<Region> element_region;
    std::vector<double> element_gamma;

    struct BoundarySets {
        std::vector<int> bottom;  ///< y = 0
        std::vector<int> top;     ///< y = 1
        std::vector<int> left;    ///< x = -X
        std::vector<int> right;   ///< x = +X
    } boundary;

    [[nodiscard]] int node_index(int i, int j) const { return i * ny + j; }
    [[nodiscard]] int num_nodes() const { return static_cast<int>(nodes.size()); }
    [[nodiscard]] int num_elements() const { return static_cast<int>(triangles.size()); }
    [[nodiscard]] int cells_x() const { return static_cast<int>(x_lines.size()) - 1; }
    [[nodiscard]] int cells_y() const { return static_cast<int>(y_lines.size()) - 1; }

    [[nodiscard]] p2::AffineMap affine(int e) const {
        const auto& t = triangles[e];
        return {nodes[t[0]][0], nodes[t[0]][1], nodes[t[1]][0],
                nodes[t[1]][1], nodes[t[2]][0], nodes[t[2]][1]};
    }

    [[nodiscard]] std::array<double, 2> centroid(int e) const {
        const auto& t = triangles[e];
        return {(nodes[t[0]][0] + nodes[t[1]][0] + nodes[t[2]][0]) / 3.0,
                (nodes[t[0]][1] + nodes[t[1]][1] + nodes[t[2]][1]) / 3.0};
    }

    /// Node column whose x-coordinate equals x (within tol), if any.
    [[nodiscard]] std::optional<int> column_at(double x, double tol = 1e-10) const {
        for (int i = 0; i < nx; ++i) {
            if (std::abs(nodes[node_index(i, 0)][0] - x) <= tol) return i;
        }
        return std::nullopt;
    }

    /// Element containing (x, y). When x lies on a vertical gridline, `side`
    /// selects the cell to the left (-1) or right (+1) of it.
    [[nodiscard]] int locate(double x, double y, int side = +1) const {
        auto cell_index = [](const std::vector<double>& lines, double v, int dir) {
            const int n = static_cast<int>(lines.size()) - 1;
            auto it = std::upper_bound(lines.begin(), lines.end(), v);
            int c = static_cast<int>(it - lines.begin()) - 1;
            const double tol = 1e-12 * (1.0 + std::abs(v));
            if (dir < 0 && c >= 0 && c <= n && std::abs(lines[c] - v) <= tol) --c;
            return std::clamp(c, 0, n - 1);
        };
        const int a = cell_index(x_lines, x, side);
        const int b = cell_index(y_lines, y, +1);
        const int e0 = 2 * (a * cells_y() + b);
        const auto ref = affine(e0).to_reference(x, y);
        const double eps = 1e-10;
        if (ref[0] >= -eps && ref[1] >= -eps && ref[0] + ref[1] <= 1.0 + eps) return e0;
        return e0 + 1;
    }

    /// Index of the node at (nx - 1 - i, j) for node (i, j).
    [[nodiscard]] int mirror_node(int node) const {
        const int i = node / ny;
        const int j = node % ny;
        return node_index(nx - 1 - i, j);
    }
};

namespace detail {

/// Sorted unique gridlines on [lo, hi], subdivided so no gap exceeds h.
inline std::vector<double> subdivide(std::vector<double> required, double h, double lo, double hi) {
    for (auto& v : required) v = std::clamp(v, lo, hi);
    std::sort(required.begin(), required.end());
    std::vector<double> uniq;
    for (double v : required) {
        if (!uniq.empty() && std::abs(v - uniq.back()) <= 1e-12 * (1.0 + std::abs(v))) continue;
        if (!uniq.empty() && v - uniq.back() < h * 1e-6) {
            throw MeshError("required gridlines " + std::to_string(uniq.back()) + " and " +
                            std::to_string(v) + " are too close (degenerate sliver)");
        }
        uniq.push_back(v);
    }
    std::vector<double> lines{uniq.front()};
    for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
        const double a = uniq[i];
        const double b = uniq[i + 1];
        const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-9)));
        for (int k = 1; k < n; ++k) lines.push_back(a + (b - a) * k / n);
        lines.push_back(b);
    }
    return lines;
}

}  // namespace detail

/// Builds the conforming P2 mesh with separate target sizes in x and y.
[[nodiscard]] inline Mesh build_structured_mesh(const WaveguideProblem& problem, const MeshOptions& opts) {
    if (!(opts.hx > 0.0) || !(opts.hy > 0.0)) throw MeshError("mesh size must be positive");
    problem.validate();
    const double X = problem.truncation;
    const double L = problem.pml_start;

    // Non-negative half of the x gridlines; the negative half is its exact mirror image.
    std::vector<double> req_x{0.0, L, X};
    std::vector<double> req_y{0.0, 1.0};
    for (const auto& b : problem.gamma_blocks) {
        for (double v : {b.x0, b.x1}) {
            if (std::abs(v) < X) req_x.push_back(std::abs(v));
        }
        for (double v : {b.y0, b.y1}) {
            if (v > 0.0 && v < 1.0) req_y.push_back(v);
        }
    }
    const std::vector<double> half = detail::subdivide(req_x, opts.hx, 0.0, X);

    Mesh mesh;
    mesh.pml_start = L;
    mesh.truncation = X;
    for (auto it = half.rbegin(); it != half.rend(); ++it) {
        if (*it != 0.0) mesh.x_lines.push_back(-*it);
    }
    mesh.x_lines.insert(mesh.x_lines.end(), half.begin(), half.end());
    mesh.y_lines = detail::subdivide(req_y, opts.hy, 0.0, 1.0);

    const int W = mesh.cells_x();
    const int H = mesh.cells_y();
    mesh.nx = 2 * W + 1;
    mesh.ny = 2 * H + 1;

    std::vector<double> xn(mesh.nx);
    std::vector<double> yn(mesh.ny);
    for (int a = 0; a <= W; ++a) xn[2 * a] = mesh.x_lines[a];
    for (int a = 0; a < W; ++a) xn[2 * a + 1] = 0.5 * (mesh.x_lines[a] + mesh.x_lines[a + 1]);
    for (int b = 0; b <= H; ++b) yn[2 * b] = mesh.y_lines[b];
    for (int b = 0; b < H; ++b) yn[2 * b + 1] = 0.5 * (mesh.y_lines[b] + mesh.y_lines[b + 1]);

    mesh.nodes.resize(static_cast<std::size_t>(mesh.nx) * mesh.ny);
    for (int i = 0; i < mesh.nx; ++i) {
        for (int j = 0; j < mesh.ny; ++j) mesh.nodes[mesh.node_index(i, j)] = {xn[i], yn[j]};
    }

    mesh.triangles.reserve(static_cast<std::size_t>(2) * W * H);
    for (int a = 0; a < W; ++a) {
        const double xc = 0.5 * (mesh.x_lines[a] + mesh.x_lines[a + 1]);
        for (int b = 0; b < H; ++b) {
            auto n = [&](int di, int dj) { return mesh.node_index(2 * a + di, 2 * b + dj); };
            if (xc > 0.0) {  // "/"
                mesh.triangles.push_back({n(0, 0), n(2, 0), n(2, 2), n(1, 0), n(2, 1), n(1, 1)});
                mesh.triangles.push_back({n(0, 0), n(2, 2), n(0, 2), n(1, 1), n(1, 2), n(0, 1)});
            } else {  // "\"
                mesh.triangles.push_back({n(0, 0), n(2, 0), n(0, 2), n(1, 0), n(1, 1), n(0, 1)});
                mesh.triangles.push_back({n(2, 0), n(2, 2), n(0, 2), n(2, 1), n(1, 2), n(1, 1)});
            }
        }
    }

    const int ne = mesh.num_elements();
    mesh.element_region.resize(ne);
    mesh.element_gamma.resize(ne);
    for (int e = 0; e < ne; ++e) {
        const auto c = mesh.centroid(e);
        mesh.element_region[e] = c[0] < -L ? Region::PmlLeft : (c[0] > L ? Region::PmlRight : Region::Interior);
        mesh.element_gamma[e] = gamma_at(problem, c[0], c[1]);
    }

    for (int i = 0; i < mesh.nx; ++i) {
        mesh.boundary.bottom.push_back(mesh.node_index(i, 0));
        mesh.boundary.top.push_back(mesh.node_index(i, mesh.ny - 1));
    }
    for (int j = 0; j < mesh.ny; ++j) {
        mesh.boundary.left.push_back(mesh.node_index(0, j));
        mesh.boundary.right.push_back(mesh.node_index(mesh.nx - 1, j));
    }
    return mesh;
}

/// Isotropic mesh with target element size h.
[[nodiscard]] inline Mesh build_structured_mesh(const WaveguideProblem& problem, double h) {
    return build_structured_mesh(problem, MeshOptions{h, h});
}

/// Node positions are symmetric under x -> -x (within tol).
[[nodiscard]] inline bool geometric_mirror_check(const Mesh& mesh, double tol = 1e-12) {
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        const auto& p = mesh.nodes[n];
        const auto& q = mesh.nodes[mesh.mirror_node(n)];
        if (std::abs(p[0] + q[0]) > tol || std::abs(p[1] - q[1]) > tol) return false;
    }
    return true;
}

/// Nodes and element tags map consistently under x -> -x
/// (gamma preserved, PmlLeft <-> PmlRight).
[[nodiscard]] inline bool mirror_check(const Mesh& mesh, double tol = 1e-12) {
    if (!geometric_mirror_check(mesh, tol)) return false;
    std::map<std::array<int, 3>, int> by_vertices;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        std::array<int, 3> key{mesh.triangles[e][0], mesh.triangles[e][1], mesh.triangles[e][2]};
        std::sort(key.begin(), key.end());
        by_vertices.emplace(key, e);
    }
    for (int e = 0; e < mesh.num_elements(); ++e) {
        std::array<int, 3> key{};
        for (int v = 0; v < 3; ++v) key[v] = mesh.mirror_node(mesh.triangles[e][v]);
        std::sort(key.begin(), key.end());
        auto it = by_vertices.find(key);
        if (it == by_vertices.end()) return false;
        const int m = it->second;
        if (mesh.element_gamma[m] != mesh.element_gamma[e]) return false;
        const Region r = mesh.element_region[e];
        const Region expected = r == Region::PmlLeft ? Region::PmlRight
                                : r == Region::PmlRight ? Region::PmlLeft
                                                        : Region::Interior;
        if (mesh.element_region[m] != expected) return false;
    }
    return true;
}

/// Plain-text listing: one "node" record per node, one "tri" record per element.
inline void dump_mesh(const Mesh& mesh, std::ostream& os) {
    os.precision(17);
    os << "# nodes " << mesh.num_nodes() << " elements " << mesh.num_elements() << "\n";
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        os << "node " << n << ' ' << mesh.nodes[n][0] << ' ' << mesh.nodes[n][1] << "\n";
    }
    for (int e = 0; e < mesh.num_elements(); ++e) {
        os << "tri " << e;
        for (int v : mesh.triangles[e]) os << ' ' << v;
        os << ' ' << to_string(mesh.element_region[e]) << ' ' << mesh.element_gamma[e] << "\n";
    }
}

}  // namespace rlm
