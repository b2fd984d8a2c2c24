#include <gtest/gtest.h>

#include <cmath>

#include "problems.hpp"
#include "rlm/element.hpp"
#include "rlm/errors.hpp"
#include "rlm/model.hpp"

namespace {

using rlm::cplx;
using rlm::pi;

TEST(BetaN, PropagatingPiston) {
    const cplx b = rlm::beta_n(2.0, 0);
    EXPECT_NEAR(b.real(), 2.0, 1e-15);
    EXPECT_NEAR(b.imag(), 0.0, 1e-15);
}

TEST(BetaN, EvanescentBranchHasPositiveImaginaryPart) {
    const cplx b = rlm::beta_n(2.0, 1);
    EXPECT_NEAR(b.real(), 0.0, 1e-14);
    EXPECT_NEAR(b.imag(), std::sqrt(pi * pi - 4.0), 1e-14);
    EXPECT_NEAR(b.imag(), 2.4227, 1e-4);
}

TEST(BetaN, SecondBandPropagating) {
    const cplx b = rlm::beta_n(4.0, 1);
    EXPECT_NEAR(b.real(), std::sqrt(16.0 - pi * pi), 1e-14);
    EXPECT_NEAR(b.real(), 2.4760, 1e-4);
    EXPECT_NEAR(b.imag(), 0.0, 1e-14);
}

TEST(BetaN, ImaginaryPartNeverNegative) {
    for (int i = -20; i <= 20; ++i) {
        for (int j = -20; j <= 20; ++j) {
            const cplx z(0.37 * i, 0.41 * j);
            EXPECT_GE(rlm::sqrt_upper(z).imag(), 0.0) << z;
            const cplx s = rlm::sqrt_upper(z);
            EXPECT_NEAR(std::abs(s * s - z), 0.0, 1e-12 * (1.0 + std::abs(z)));
        }
    }
}

TEST(BetaN, PropagatingEvanescentDichotomy) {
    const double k = 7.0;  // N = 2
    for (int n = 0; n <= 6; ++n) {
        const cplx b = rlm::beta_n(k, n);
        if (n <= 2) {
            EXPECT_GT(b.real(), 0.0);
            EXPECT_NEAR(b.imag(), 0.0, 1e-14);
        } else {
            EXPECT_NEAR(b.real(), 0.0, 1e-14);
            EXPECT_GT(b.imag(), 0.0);
        }
    }
}

TEST(ModeField, PistonAtOrigin) {
    const cplx w = rlm::mode_field(0, rlm::ModeSign::Plus, 2.0, 0.0, 0.3);
    EXPECT_NEAR(w.real(), 0.5, 1e-15);
    EXPECT_NEAR(w.imag(), 0.0, 1e-15);
    for (double y : {0.0, 0.25, 0.9}) {
        EXPECT_NEAR(std::abs(rlm::mode_field(0, rlm::ModeSign::Minus, 2.0, 0.0, y) - 0.5), 0.0, 1e-15);
    }
}

TEST(ModeField, EvanescentModeDecays) {
    // (2 |beta_1|)^{-1/2} exp(-|beta_1|) phi_1(0), phi_1(0) = sqrt(2)
    const double b = std::sqrt(pi * pi - 4.0);
    const double expected = std::exp(-b) * std::sqrt(2.0) / std::sqrt(2.0 * b);
    const cplx w = rlm::mode_field(1, rlm::ModeSign::Plus, 2.0, 1.0, 0.0);
    EXPECT_NEAR(w.real(), expected, 1e-14);
    EXPECT_NEAR(w.imag(), 0.0, 1e-14);
    EXPECT_NEAR(w.real(), 0.05697, 1e-5);
}

TEST(ModeField, ThresholdRejected) {
    EXPECT_THROW((void)rlm::mode_field(1, rlm::ModeSign::Plus, pi, 0.0, 0.0), rlm::ThresholdError);
    EXPECT_THROW((void)rlm::propagating_index(2.0 * pi), rlm::ThresholdError);
    EXPECT_EQ(rlm::propagating_index(2.0), 0);
    EXPECT_EQ(rlm::propagating_index(3.5), 1);
}

TEST(ModalBasis, Orthonormal) {
    for (int n = 0; n <= 10; ++n) {
        for (int m = 0; m <= 10; ++m) {
            // composite 5-point Gauss on 40 panels: exact to round-off for these cosines
            double acc = 0.0;
            const int panels = 40;
            for (int p = 0; p < panels; ++p) {
                for (const auto& g : rlm::p2::gauss5) {
                    const double y = (p + g.s) / panels;
                    acc += g.weight / panels * rlm::ModalBasis::phi(n, y) * rlm::ModalBasis::phi(m, y);
                }
            }
            EXPECT_NEAR(acc, n == m ? 1.0 : 0.0, 1e-12) << n << "," << m;
        }
    }
}

TEST(ScalingProfile, PiecewiseValues) {
    const rlm::ScalingProfile out{rlm::ScalingKind::OutgoingBoth, pi / 4, 1.0};
    const rlm::ScalingProfile conj{rlm::ScalingKind::IngoingLeftOutgoingRight, pi / 4, 1.0};
    EXPECT_NEAR(std::abs(rlm::scaling_value(out, -5.0) - std::polar(1.0, -pi / 4)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(rlm::scaling_value(conj, -5.0) - std::polar(1.0, pi / 4)), 0.0, 1e-15);
    EXPECT_EQ(rlm::scaling_value(out, 0.5), cplx(1.0));
    EXPECT_EQ(rlm::scaling_value(conj, 0.5), cplx(1.0));
}

TEST(ScalingProfile, MirrorSymmetry) {
    const rlm::ScalingProfile out{rlm::ScalingKind::OutgoingBoth, 0.6, 1.0};
    const rlm::ScalingProfile conj{rlm::ScalingKind::IngoingLeftOutgoingRight, 0.6, 1.0};
    for (double x : {0.0, 0.3, 1.0, 1.5, 7.0, 12.0}) {
        EXPECT_EQ(out.value(-x), out.value(x));
        EXPECT_EQ(conj.value(-x), std::conj(conj.value(x)));
    }
}

TEST(Gamma, BlocksAndOverlap) {
    const auto sym = rlm::testing::symmetric_obstacle();
    EXPECT_EQ(rlm::gamma_at(sym, 0.0, 0.5), 5.0);
    EXPECT_EQ(rlm::gamma_at(sym, -1.4, 0.5), 1.0);
    const auto non = rlm::testing::nonsymmetric_obstacle();
    EXPECT_EQ(rlm::gamma_at(non, -0.5, 0.6), 1.0);
    EXPECT_EQ(rlm::gamma_at(non, 0.5, 0.6), 5.0);

    rlm::WaveguideProblem p;
    p.gamma_blocks.push_back({-1, 1, 0, 1, 2.0});
    p.gamma_blocks.push_back({-0.5, 0.5, 0, 1, 3.0});
    EXPECT_EQ(rlm::gamma_at(p, 0.0, 0.5), 3.0);
    EXPECT_EQ(rlm::gamma_at(p, 0.75, 0.5), 2.0);
}

TEST(Gamma, Evenness) {
    EXPECT_TRUE(rlm::testing::symmetric_obstacle().gamma_is_even());
    EXPECT_FALSE(rlm::testing::nonsymmetric_obstacle().gamma_is_even());
    EXPECT_TRUE(rlm::testing::empty_strip().gamma_is_even());
}

TEST(WaveguideProblem, Validation) {
    auto p = rlm::testing::symmetric_obstacle();
    EXPECT_NO_THROW(p.validate());
    p.theta = 2.0;
    EXPECT_THROW(p.validate(), rlm::ConfigError);
    p = rlm::testing::symmetric_obstacle();
    p.truncation = 0.5;
    EXPECT_THROW(p.validate(), rlm::ConfigError);
    p = rlm::testing::symmetric_obstacle();
    p.gamma_blocks.push_back({0.5, 1.5, 0.2, 0.4, 3.0});  // reaches into the layer
    EXPECT_THROW(p.validate(), rlm::ConfigError);
    p = rlm::testing::symmetric_obstacle();
    p.gamma_blocks.push_back({0.1, 0.2, 0.2, 0.4, -1.0});
    EXPECT_THROW(p.validate(), rlm::ConfigError);
}

}  // namespace
