#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "roughfilm/subcritical.hpp"

using namespace roughfilm;

namespace {

RoughnessProfile cosine() { return make_profile(cosine_profile(1.0, 0.5)); }
const MacroFunction kUnitG = MacroFunction::constant(1.0, true);

TEST(Subcritical, CosineProfileMatchesBruteForceOracle) {
  const auto start = std::chrono::steady_clock::now();
  const auto c = subcritical_coefficients(cosine(), kUnitG);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto o = oracle::subcritical_bruteforce(oracle::cosine_gap, oracle::cosine_gap_slope, [](double) { return 1.0; });
  EXPECT_NEAR(c.a0, o.a0, 1e-10);
  EXPECT_NEAR(c.b0, o.b0, 1e-10);
  EXPECT_NEAR(c.c0, o.c0, 1e-10);
  EXPECT_NEAR(o.q_mean_residual, 0.0, 1e-12);
  EXPECT_LT(seconds, 1.0);
}

TEST(Subcritical, CosineProfileTrigIntegrals) {
  // I3 = 1 + 3 a^2 / 2 = 1.375, I6 = 3.2314453125 for a = 1/2.
  const auto c = subcritical_coefficients(cosine(), kUnitG);
  EXPECT_NEAR(c.int_h3, 1.375, 1e-13);
  EXPECT_NEAR(c.int_h6, 3.2314453125, 1e-13);
  EXPECT_NEAR(c.b0, 1.375 / 12.0, 1e-13);
  EXPECT_NEAR(c.a0, (2.0 * 1.375 - 3.2314453125 / 1.375) / 12.0, 1e-13);
  EXPECT_NEAR(c.c0, 0.5625, 1e-13);
  EXPECT_NEAR(c.harmonic_mean_a, 1.0 / (12.0 * 2.3094010767585), 1e-12);
  EXPECT_TRUE(c.warnings.empty());
}

TEST(Subcritical, FlatWallAllAgree) {
  const auto c = subcritical_coefficients(make_profile(cosine_profile(1.0, 0.0)), kUnitG);
  EXPECT_NEAR(c.a0, 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(c.b0, 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(c.harmonic_mean_a, 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(c.c0, 0.5, 1e-15);
}

TEST(Subcritical, TabulatedProfileAgainstOracle) {
  std::vector<double> s{1.0, 1.2, 1.5, 1.3, 0.9, 0.7, 0.8, 0.95, 1.1, 1.0, 0.85, 0.9};
  const auto p = make_profile(TabulatedSpec{s});
  const MacroFunction g(CosineForm{1.0, 0.4, 2.0, 0.0}, true);
  const auto c = subcritical_coefficients(p, g);
  const auto o = oracle::subcritical_bruteforce([&](double z) { return p.h(z); }, [&](double z) { return p.dh(z); },
                                                [&](double z) { return g(z); });
  // Simpson on a cubic spline with 12 knots: exact up to the kink terms.
  EXPECT_NEAR(c.a0, o.a0, 1e-9);
  EXPECT_NEAR(c.b0, o.b0, 1e-9);
  EXPECT_NEAR(c.c0, o.c0, 1e-9);
}

TEST(Subcritical, PiPrimeSolvesCellOdeWithZeroMean) {
  const auto pi = compute_pi_prime(cosine());
  EXPECT_LE(pi_ode_residual(pi), 1e-8);
  EXPECT_LE(std::abs(pi.mean), 1e-10);
  // Derivative matches finite differences of pi'.
  for (double z : {-0.3, 0.1, 0.45}) EXPECT_NEAR(pi.second(z), (pi(z + 1e-6) - pi(z - 1e-6)) / 2e-6, 1e-7);
}

TEST(Subcritical, CellFields) {
  const auto pi = compute_pi_prime(cosine());
  const double z1 = 0.1, h = cosine().h(z1), z2 = 0.3 * h;
  const auto f = subcritical_cell_fields(pi, 2.0, kUnitG, z1, z2);
  const double q = z2 * z2 - h * z2;
  EXPECT_NEAR(f.u_bl, 0.5 * (1.0 + pi(z1)) * q, 1e-15);
  EXPECT_NEAR(f.w_bl, -0.5 * q, 1e-15);
  EXPECT_NEAR(f.T_hat, 2.0 * z2, 1e-15);
  EXPECT_EQ(subcritical_cell_fields(pi, 1.0, kUnitG, z1, 0.0).w_bl, 0.0);
  try {
    (void)subcritical_cell_fields(pi, 1.0, kUnitG, z1, 1.1 * h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
  }
}

TEST(Subcritical, C0FollowsNonConstantG) {
  // h = 1 + a cos(2 pi z), G = cos(2 pi z): int h^2 G = 2a / 2 = a.
  const MacroFunction g(CosineForm{0.0, 1.0, 1.0, 0.0}, true);
  EXPECT_NEAR(compute_c0(cosine(), g), 0.5 * 0.5, 1e-13);
}

}  // namespace
