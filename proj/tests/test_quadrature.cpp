#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nliconquer/quadrature.hpp"

using namespace nliconquer;

TEST(Integrate, Polynomial) {
    // G7-K15 is exact for degree <= 22
    const auto r = quad::integrate([](double x) { return std::pow(x, 9) - 3 * x * x; }, -1.0, 2.0);
    EXPECT_NEAR(r.value, (std::pow(2.0, 10) - 1.0) / 10.0 - 9.0, 1e-12);
    EXPECT_EQ(r.evaluations, 15u);
}

TEST(Integrate, SineHalfPeriod) {
    quad::Options opt;
    opt.rel_tol = 1e-10;
    const auto r = quad::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, opt);
    EXPECT_NEAR(r.value, 2.0, 1e-10);
}

TEST(Integrate, SharpLorentzianMeetsTolerance) {
    const double eps = 1e-4;
    const double exact = 2.0 * std::atan(1.0 / std::sqrt(eps)) / std::sqrt(eps);
    for (double tol : {1e-4, 1e-7}) {
        quad::Options opt;
        opt.rel_tol = tol;
        const auto r = quad::integrate([&](double x) { return 1.0 / (eps + x * x); }, -1.0, 1.0, opt);
        EXPECT_LT(std::abs(r.value - exact) / exact, tol);
        EXPECT_LE(r.error, tol * std::abs(r.value));
    }
}

TEST(Integrate, EmptyAndReversedIntervals) {
    EXPECT_EQ(quad::integrate([](double) { return 1.0; }, 3.0, 3.0).value, 0.0);
    EXPECT_NEAR(quad::integrate([](double x) { return x; }, 1.0, 0.0).value, -0.5, 1e-14);
}

TEST(Integrate, NonConvergenceCarriesEstimate) {
    quad::Options opt;
    opt.rel_tol = 1e-12;
    opt.max_depth = 2;
    try {
        quad::integrate([](double x) { return std::sin(1.0 / x); }, 1e-4, 1.0, opt);
        FAIL() << "expected QuadratureError";
    } catch (const quad::QuadratureError& e) {
        EXPECT_TRUE(std::isfinite(e.estimate()));
        EXPECT_GT(e.error(), e.tolerance());
        EXPECT_NEAR(e.estimate(), 0.5040670619, 0.05);
    }
}

TEST(Integrate, HalvingToleranceMovesResultLessThanCoarseTolerance) {
    const auto f = [](double x) { return std::exp(-x * x) * std::cos(7 * x) + 1.0; };
    quad::Options coarse, fine;
    coarse.rel_tol = 1e-4;
    fine.rel_tol = 5e-5;
    const double a = quad::integrate(f, -4.0, 4.0, coarse).value;
    const double b = quad::integrate(f, -4.0, 4.0, fine).value;
    EXPECT_LT(std::abs(a - b), 1e-4 * std::abs(b));
}

TEST(IntegratePiecewise, KinkOnBreakpoint) {
    const auto r = quad::integrate_piecewise([](double x) { return std::abs(x); }, {-1.0, 0.0, 2.0});
    EXPECT_NEAR(r.value, 2.5, 1e-14);
    EXPECT_EQ(r.evaluations, 30u);
}

TEST(IntegratePiecewise, SkipsEmptyPieces) {
    const auto r = quad::integrate_piecewise([](double) { return 1.0; }, {0.0, 0.0, 1.0, 1.0, 3.0});
    EXPECT_NEAR(r.value, 3.0, 1e-14);
    EXPECT_EQ(quad::integrate_piecewise([](double) { return 1.0; }, {1.0}).value, 0.0);
}

TEST(Integrate2d, Bilinear) {
    const auto r = quad::integrate_2d([](double x, double y) { return x * y; }, 0.0, 1.0, 0.0, 1.0);
    EXPECT_NEAR(r.value, 0.25, 1e-14);
}

TEST(Integrate2d, Gaussian) {
    quad::Options opt;
    opt.rel_tol = 1e-9;
    const auto r = quad::integrate_2d([](double x, double y) { return std::exp(-(x * x + y * y)); },
                                      -3.0, 3.0, -3.0, 3.0, opt);
    const double one = std::sqrt(std::numbers::pi) * std::erf(3.0);
    EXPECT_NEAR(r.value, one * one, 1e-9 * one * one);
}

TEST(Integrate2d, AnisotropicPeakRefinesTheRightAxis) {
    const double eps = 1e-3;
    const auto f = [&](double x, double) { return 1.0 / (eps + x * x); };
    const auto r = quad::integrate_2d(f, -1.0, 1.0, 0.0, 2.0);
    const double exact = 2.0 * 2.0 * std::atan(1.0 / std::sqrt(eps)) / std::sqrt(eps);
    EXPECT_LT(std::abs(r.value - exact) / exact, 1e-4);
}
