#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "roughfilm/cell_laplace.hpp"

using namespace roughfilm;

namespace {

RoughnessProfile flat(double c = 1.0) { return make_profile(cosine_profile(c, 0.0)); }
RoughnessProfile cosine() { return make_profile(cosine_profile(1.0, 0.5)); }

class FlatWallLaplace : public ::testing::TestWithParam<double> {};

TEST_P(FlatWallLaplace, RecoversQuadraticProfile) {
  const auto sol = solve_laplace_cell(build_mesh(flat(), 16, 16), GetParam());
  EXPECT_NEAR(sol.b_lambda, 1.0 / 12.0, 1e-12);
  const auto& sp = *sol.space;
  for (int J = 0; J < sp.lattice_z2(); ++J) {
    const double z2 = sp.node_position(5, J).y;
    EXPECT_NEAR(sol.w[sp.node(5, J)], 0.5 * z2 * (1.0 - z2), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Lambdas, FlatWallLaplace, ::testing::Values(0.5, 1.0, 2.0));

TEST(CellLaplace, EnergyIdentity) {
  const auto sol = solve_laplace_cell(build_mesh(cosine(), 32, 32), 1.0);
  EXPECT_LE(energy_identity_check(sol), 1e-9);
  EXPECT_NEAR(sol.b_lambda, sol.mean_w, 1e-12 * sol.b_lambda);
}

TEST(CellLaplace, RoughWallLiesBetweenMeanGapBounds) {
  // w >= 0 and b < b of the flat channel of the same maximal height.
  const auto sol = solve_laplace_cell(build_mesh(cosine(), 32, 32), 1.0);
  EXPECT_GT(sol.b_lambda, std::pow(0.5, 3) / 12.0);
  EXPECT_LT(sol.b_lambda, std::pow(1.5, 3) / 12.0);
  for (double v : sol.w) EXPECT_GE(v, -1e-14);
}

TEST(CellLaplace, SmallLambdaApproachesColumnwiseValue) {
  // For lambda -> 0 each column solves -w'' = 1 on (0, h), so b -> I3 / 12.
  const double b_small = solve_laplace_cell(build_mesh(cosine(), 64, 16), 0.05).b_lambda;
  EXPECT_NEAR(b_small, 1.375 / 12.0, 2e-3);
}

TEST(CellLaplace, LargeLambdaApproachesNarrowestGap) {
  // As lambda grows the z1 coupling dominates and w is forced towards a
  // constant-in-z1 field that must vanish where the gap is smallest.
  const double b1 = solve_laplace_cell(build_mesh(cosine(), 32, 16), 1.0).b_lambda;
  const double b8 = solve_laplace_cell(build_mesh(cosine(), 32, 16), 8.0).b_lambda;
  EXPECT_LT(b8, b1);
}

TEST(CellLaplace, FieldDump) {
  const auto sol = solve_laplace_cell(build_mesh(flat(), 8, 8), 1.0);
  std::ostringstream os;
  write_laplace_fields(sol, os);
  EXPECT_EQ(os.str().substr(0, 8), "z1,z2,w\n");
}

TEST(CellLaplace, ZeroFieldHelper) {
  auto space = std::make_shared<const P2Space>(build_mesh(flat(), 8, 8));
  const auto z = zero_laplace_field(space, 1.0);
  EXPECT_EQ(z.b_lambda, 0.0);
  for (double v : z.w) EXPECT_EQ(v, 0.0);
}

}  // namespace
