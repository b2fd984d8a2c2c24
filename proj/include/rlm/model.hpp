/**
 * @file model.hpp
 * @brief Continuous-problem vocabulary for a Neumann acoustic waveguide
 *        (0,1) x R with a penetrable obstacle: geometry, the coefficient
 *        gamma, transverse modes, the dispersion branch and the two
 *        piecewise-constant complex scaling profiles.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "rlm/errors.hpp"

namespace rlm {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// |beta_n| below this value is treated as sitting on a threshold n*pi.
inline constexpr double default_threshold_tol = 1e-12;

/// Axis-aligned rectangle on which gamma takes a constant value.
struct GammaBlock {
    double x0 = 0.0;
    double x1 = 0.0;
    double y0 = 0.0;
    double y1 = 1.0;
    double value = 1.0;

    [[nodiscard]] bool contains(double x, double y) const {
        return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    }
};

/// Full description of a truncated, complex-scaled waveguide problem.
struct WaveguideProblem {
    double theta = pi / 4.0;   ///< scaling angle, 0 < theta < pi/2
    double pml_start = 1.0;    ///< L: scaling starts at |x| = L
    double truncation = 12.0;  ///< X: Dirichlet truncation at x = +-X
    std::vector<GammaBlock> gamma_blocks;  ///< later blocks override earlier ones
    double threshold_tol = default_threshold_tol;  ///< |beta_n| below this counts as a threshold

    /// Throws ConfigError when an invariant is broken.
    void validate() const {
        if (!(theta > 0.0 && theta < pi / 2.0)) {
            throw ConfigError("theta must satisfy 0 < theta < pi/2, got " + std::to_string(theta));
        }
        if (!(pml_start > 0.0)) {
            throw ConfigError("pml_start must be positive");
        }
        if (!(truncation > pml_start)) {
            throw ConfigError("truncation must exceed pml_start");
        }
        if (!(threshold_tol > 0.0)) {
            throw ConfigError("threshold_tol must be positive");
        }
        for (const auto& b : gamma_blocks) {
            if (!(b.value > 0.0)) {
                throw ConfigError("gamma block values must be positive");
            }
            if (!(b.x0 < b.x1 && b.y0 < b.y1)) {
                throw ConfigError("gamma block must have x0 < x1 and y0 < y1");
            }
            if (b.value != 1.0 &&
                (b.x0 < -pml_start || b.x1 > pml_start || b.y0 < 0.0 || b.y1 > 1.0)) {
                throw ConfigError("gamma block with value != 1 must lie inside |x| <= pml_start, 0 <= y <= 1");
            }
        }
    }

    /// True when gamma(x, y) == gamma(-x, y) block-wise (mirror image of the block list
    /// describes the same coefficient); checked pointwise on a probe grid.
    [[nodiscard]] bool gamma_is_even() const;
};

/// gamma at (x, y): value of the last listed block containing the point, else 1.
[[nodiscard]] inline double gamma_at(const WaveguideProblem& problem, double x, double y) {
    double g = 1.0;
    for (const auto& b : problem.gamma_blocks) {
        if (b.contains(x, y)) g = b.value;
    }
    return g;
}

inline bool WaveguideProblem::gamma_is_even() const {
    // Probe at cell centres of the grid spanned by all block edges and their mirror images.
    std::vector<double> xs{-pml_start, 0.0, pml_start};
    std::vector<double> ys{0.0, 1.0};
    for (const auto& b : gamma_blocks) {
        xs.insert(xs.end(), {b.x0, b.x1, -b.x0, -b.x1});
        ys.insert(ys.end(), {b.y0, b.y1});
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (xs[i + 1] - xs[i] < 1e-12) continue;
        const double xm = 0.5 * (xs[i] + xs[i + 1]);
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            if (ys[j + 1] - ys[j] < 1e-12) continue;
            const double ym = 0.5 * (ys[j] + ys[j + 1]);
            if (gamma_at(*this, xm, ym) != gamma_at(*this, -xm, ym)) return false;
        }
    }
    return true;
}

/// Square root with arg(z) taken in [0, 2*pi), so Im(sqrt(z)) >= 0 for every z.
[[nodiscard]] inline cplx sqrt_upper(cplx z) {
    double arg = std::arg(z);  // (-pi, pi]
    if (arg < 0.0) arg += 2.0 * pi;
    return std::polar(std::sqrt(std::abs(z)), 0.5 * arg);
}

/// Longitudinal wavenumber beta_n(k) = sqrt(k^2 - n^2 pi^2) on the Im >= 0 branch.
[[nodiscard]] inline cplx beta_n(cplx k, int n) {
    const double npi = n * pi;
    return sqrt_upper(k * k - npi * npi);
}

/// Transverse modal basis: phi_0 = 1, phi_n = sqrt(2) cos(n pi y).
class ModalBasis {
public:
    explicit ModalBasis(int max_index = 32) : max_index_(max_index) {}

    [[nodiscard]] int max_index() const { return max_index_; }

    [[nodiscard]] static double phi(int n, double y) {
        return n == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(n * pi * y);
    }

    [[nodiscard]] static cplx beta(cplx k, int n) { return beta_n(k, n); }

private:
    int max_index_;
};

/// Number of propagating modes minus one: N with k in (N pi, (N+1) pi).
/// Throws ThresholdError when k is within tol of a threshold.
[[nodiscard]] inline int propagating_index(double k, double tol = 1e-9) {
    if (!(k > 0.0)) throw ThresholdError("wavenumber must be positive");
    const double r = k / pi;
    const double nearest = std::round(r);
    if (std::abs(r - nearest) * pi < tol) {
        throw ThresholdError("wavenumber " + std::to_string(k) + " sits on a threshold");
    }
    return static_cast<int>(std::floor(r));
}

enum class ModeSign { Plus, Minus };

/// Flux-normalised guided wave w_n^{+-}(x,y) = (2|beta_n|)^{-1/2} exp(+-i beta_n x) phi_n(y).
[[nodiscard]] inline cplx mode_field(int n, ModeSign sign, cplx k, double x, double y,
                                     double threshold_tol = default_threshold_tol) {
    const cplx b = beta_n(k, n);
    const double mag = std::abs(b);
    if (mag < threshold_tol) {
        throw ThresholdError("mode " + std::to_string(n) + " is at threshold (|beta_n| ~ 0)");
    }
    const double s = sign == ModeSign::Plus ? 1.0 : -1.0;
    return std::exp(cplx(0.0, s) * b * x) * (ModalBasis::phi(n, y) / std::sqrt(2.0 * mag));
}

enum class ScalingKind {
    OutgoingBoth,              ///< classical scaling (resonances, operator A)
    IngoingLeftOutgoingRight,  ///< conjugated scaling (reflectionless spectrum, operator B)
};

/// Piecewise-constant complex scaling coefficient in front of d/dx.
/// theta == 0 gives the unscaled operator, which tests use as a Hermitian reference.
struct ScalingProfile {
    ScalingKind kind = ScalingKind::OutgoingBoth;
    double theta = pi / 4.0;
    double pml_start = 1.0;

    [[nodiscard]] cplx value(double x) const {
        if (std::abs(x) < pml_start) return 1.0;
        if (kind == ScalingKind::IngoingLeftOutgoingRight && x < 0.0) {
            return std::polar(1.0, theta);
        }
        return std::polar(1.0, -theta);
    }
};

[[nodiscard]] inline cplx scaling_value(const ScalingProfile& profile, double x) {
    return profile.value(x);
}

[[nodiscard]] inline std::string to_string(ScalingKind kind) {
    return kind == ScalingKind::OutgoingBoth ? "resonance" : "reflectionless";
}

}  // namespace rlm
