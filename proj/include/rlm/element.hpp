/**
 * @file element.hpp
 * @brief Six-node quadratic Lagrange triangle and the quadrature rules used
 *        by assembly and trace integrals.
 */
#pragma once

#include <array>
#include <cmath>

namespace rlm::p2 {

struct QuadPoint {
    double xi;
    double eta;
    double weight;  ///< weights sum to 1 (multiply by the element area)
};

/// Symmetric 6-point rule, exact for polynomials of degree <= 4.
inline constexpr std::array<QuadPoint, 6> triangle_rule_deg4{{
    {0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.109951743655322},
}};

struct GaussPoint {
    double s;       ///< position in [0, 1]
    double weight;  ///< weights sum to 1
};

/// 5-point Gauss-Legendre rule mapped to [0, 1].
inline constexpr std::array<GaussPoint, 5> gauss5{{
    {0.5 - 0.5 * 0.906179845938664, 0.5 * 0.236926885056189},
    {0.5 - 0.5 * 0.538469310105683, 0.5 * 0.478628670499366},
    {0.5, 0.5 * 0.568888888888889},
    {0.5 + 0.5 * 0.538469310105683, 0.5 * 0.478628670499366},
    {0.5 + 0.5 * 0.906179845938664, 0.5 * 0.236926885056189},
}};

/// Shape functions in local order v0, v1, v2, m01, m12, m20.
[[nodiscard]] inline std::array<double, 6> shape(double xi, double eta) {
    const double l0 = 1.0 - xi - eta;
    const double l1 = xi;
    const double l2 = eta;
    return {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
            4.0 * l0 * l1,         4.0 * l1 * l2,         4.0 * l2 * l0};
}

/// Reference gradients (d/dxi, d/deta) of the shape functions.
[[nodiscard]] inline std::array<std::array<double, 2>, 6> shape_grad_ref(double xi, double eta) {
    const double l0 = 1.0 - xi - eta;
    const double l1 = xi;
    const double l2 = eta;
    // dl0 = (-1,-1), dl1 = (1,0), dl2 = (0,1)
    return {{
        {-(4.0 * l0 - 1.0), -(4.0 * l0 - 1.0)},
        {4.0 * l1 - 1.0, 0.0},
        {0.0, 4.0 * l2 - 1.0},
        {4.0 * (l0 - l1), -4.0 * l1},
        {4.0 * l2, 4.0 * l1},
        {-4.0 * l2, 4.0 * (l0 - l2)},
    }};
}

/// Affine map of a triangle with vertices p0, p1, p2.
struct AffineMap {
    double x0, y0;
    double j00, j01, j10, j11;  // columns: p1 - p0, p2 - p0
    double det;
    double inv00, inv01, inv10, inv11;

    AffineMap(double ax, double ay, double bx, double by, double cx, double cy)
        : x0(ax), y0(ay), j00(bx - ax), j01(cx - ax), j10(by - ay), j11(cy - ay) {
        det = j00 * j11 - j01 * j10;
        inv00 = j11 / det;
        inv01 = -j01 / det;
        inv10 = -j10 / det;
        inv11 = j00 / det;
    }

    [[nodiscard]] double area() const { return 0.5 * std::abs(det); }

    [[nodiscard]] std::array<double, 2> to_physical(double xi, double eta) const {
        return {x0 + j00 * xi + j01 * eta, y0 + j10 * xi + j11 * eta};
    }

    [[nodiscard]] std::array<double, 2> to_reference(double x, double y) const {
        const double dx = x - x0;
        const double dy = y - y0;
        return {inv00 * dx + inv01 * dy, inv10 * dx + inv11 * dy};
    }

    /// Physical gradient from a reference gradient: J^{-T} g.
    [[nodiscard]] std::array<double, 2> grad(const std::array<double, 2>& g) const {
        return {inv00 * g[0] + inv10 * g[1], inv01 * g[0] + inv11 * g[1]};
    }
};

}  // namespace rlm::p2
