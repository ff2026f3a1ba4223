#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "roughfilm/quadrature.hpp"

using namespace roughfilm;

namespace {

TEST(Quadrature, PolynomialExact) {
  const double v = integrate([](double x) { return 3 * x * x + 2 * x + 1; }, -0.5, 0.5);
  EXPECT_NEAR(v, 1.25, 1e-14);
}

TEST(Quadrature, ReversedLimitsFlipSign) {
  const auto f = [](double x) { return std::exp(x); };
  EXPECT_NEAR(integrate(f, 1.0, 0.0), -(std::exp(1.0) - 1.0), 1e-13);
}

TEST(Quadrature, KinkAtBreakpoint) {
  const std::vector<double> breaks{0.1};
  const double v = integrate([](double x) { return std::abs(x - 0.1); }, -0.5, 0.5, 1e-12, breaks);
  EXPECT_NEAR(v, 0.5 * 0.6 * 0.6 + 0.5 * 0.4 * 0.4, 1e-13);
}

TEST(Quadrature, MatchesSimpsonOnPeriodicIntegrand) {
  auto f = [](double z) { return std::pow(1.0 + 0.5 * std::cos(2 * std::numbers::pi * z), -3); };
  EXPECT_NEAR(integrate(f, -0.5, 0.5), oracle::simpson(f, -0.5, 0.5), 1e-10);
}

TEST(Quadrature, ReportsErrorEstimate) {
  const auto r = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  EXPECT_NEAR(r.value, 2.0, 1e-13);
  EXPECT_LE(r.error_estimate, 1e-12);
}

TEST(Quadrature, NonIntegrableSingularityFails) {
  try {
    (void)integrate([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::QuadratureFailure || e.code() == ErrorCode::NonFinite);
  }
}

}  // namespace
