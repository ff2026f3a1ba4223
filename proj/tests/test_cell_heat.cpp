#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "roughfilm/cell_heat.hpp"

using namespace roughfilm;

namespace {

const MacroFunction kUnitG = MacroFunction::constant(1.0, true);

LaplaceCellSolution laplace(double amp, int n = 16, double lambda = 1.0) {
  auto space = std::make_shared<const P2Space>(build_mesh(make_profile(cosine_profile(1.0, amp)), n, n));
  return solve_laplace_cell(space, lambda);
}

// Flat wall without drift: T = k G z2, so T_av = k G / 2.
TEST(CellHeat, FlatWallWithoutDrift) {
  const auto w = laplace(0.0);
  const auto sol = solve_heat_cell(w, 0.0, 1.0, kUnitG);
  EXPECT_NEAR(sol.T_av_contrib, 0.5, 1e-12);
  const auto& sp = *sol.space;
  for (int J = 0; J < sp.lattice_z2(); ++J) EXPECT_NEAR(sol.T[sp.node(4, J)], sp.node_position(4, J).y, 1e-12);
  EXPECT_TRUE(sol.warnings.empty());
}

TEST(CellHeat, FlatWallDriftAlongLayersChangesNothing) {
  // w depends on z2 only, so the drift is parallel to the wall and T = z2
  // still solves the problem.
  const auto w = laplace(0.0);
  const auto sol = solve_heat_cell(w, 3.0, 1.0, kUnitG);
  EXPECT_NEAR(sol.T_av_contrib, 0.5, 1e-10);
}

TEST(CellHeat, LinearInKAndG) {
  const auto w = laplace(0.5);
  const auto g = MacroFunction(CosineForm{1.0, 0.3, 1.0, 0.2}, true);
  const auto t1 = solve_heat_cell(w, 0.7, 1.0, g);
  const auto t2 = solve_heat_cell(w, 0.7, 2.5, g);
  EXPECT_NEAR(t2.T_av_contrib, 2.5 * t1.T_av_contrib, 1e-10 * std::abs(t1.T_av_contrib));
  const auto g2 = MacroFunction(CosineForm{2.0, 0.6, 1.0, 0.2}, true);
  const auto t3 = solve_heat_cell(w, 0.7, 1.0, g2);
  EXPECT_NEAR(t3.T_av_contrib, 2.0 * t1.T_av_contrib, 1e-10 * std::abs(t1.T_av_contrib));
  EXPECT_EQ(solve_heat_cell(w, 0.7, 0.0, g).T_av_contrib, 0.0);
}

TEST(CellHeat, SurfaceMeasureMatters) {
  const auto w = laplace(0.5);
  HeatOptions arc, flat;
  flat.surface_measure = SurfaceMeasure::Flat;
  const double ta = solve_heat_cell(w, 0.0, 1.0, kUnitG, arc).T_av_contrib;
  const double tf = solve_heat_cell(w, 0.0, 1.0, kUnitG, flat).T_av_contrib;
  EXPECT_GT(ta, tf);
  const auto w0 = laplace(0.0);
  EXPECT_NEAR(solve_heat_cell(w0, 0.0, 1.0, kUnitG, arc).T_av_contrib,
              solve_heat_cell(w0, 0.0, 1.0, kUnitG, flat).T_av_contrib, 1e-13);
}

TEST(CellHeat, StrongDriftIsStabilizedAndFlagged) {
  const auto w = laplace(0.5);
  const auto sol = solve_heat_cell(w, 500.0, 1.0, kUnitG);
  EXPECT_GT(sol.upwinded_elements, 0);
  EXPECT_GT(sol.max_peclet, 2.0);
  ASSERT_FALSE(sol.warnings.empty());
  EXPECT_EQ(sol.warnings.front().code, "AdvectionDominated");
  for (double v : sol.T) EXPECT_TRUE(std::isfinite(v));
}

TEST(CellHeat, FluxSamplesOnePerTopVertex) {
  const auto w = laplace(0.0, 8);
  const auto sol = solve_heat_cell(w, 0.0, 2.0, kUnitG);
  ASSERT_EQ(sol.flux_data.size(), 8u);
  for (const auto& f : sol.flux_data) EXPECT_DOUBLE_EQ(f.value, 2.0);
}

TEST(CellHeat, RejectsNegativeK) { EXPECT_THROW((void)solve_heat_cell(laplace(0.0, 8), 0.0, -1.0, kUnitG), Error); }

TEST(TemperatureProfile, SharesSolvesBetweenEqualDriftScales) {
  const auto w = laplace(0.5, 12);
  FluidParams p;
  p.D = 1.0;
  p.k = 1.0;
  const std::vector<double> x{-0.5, -0.25, 0.0, 0.25, 0.5};
  const auto constant = temperature_profile(w, p, MacroFunction::constant(2.0), kUnitG, x);
  EXPECT_EQ(constant.solves.size(), 1u);
  for (double t : constant.T_av) EXPECT_EQ(t, constant.T_av.front());
  const auto even = temperature_profile(w, p, MacroFunction(PolynomialForm{{0.0, 0.0, 1.0}}), kUnitG, x, {}, 2);
  EXPECT_EQ(even.solves.size(), 3u);  // x^2 takes three distinct values
  EXPECT_EQ(even.T_av[0], even.T_av[4]);
  EXPECT_EQ(even.T_av[1], even.T_av[3]);
}

TEST(TemperatureProfile, ThreadCountDoesNotChangeResults) {
  const auto w = laplace(0.5, 12);
  FluidParams p;
  p.D = 0.8;
  p.k = 1.0;
  const std::vector<double> x{-0.5, -0.2, 0.1, 0.4};
  const MacroFunction g(PolynomialForm{{0.1, 1.0}});
  const auto one = temperature_profile(w, p, g, kUnitG, x, {}, 1);
  const auto four = temperature_profile(w, p, g, kUnitG, x, {}, 4);
  EXPECT_EQ(one.T_av, four.T_av);
}

TEST(TemperatureProfile, EnvironmentControlsThreadCount) {
  ::setenv("ROUGHFILM_THREADS", "3", 1);
  EXPECT_EQ(heat_thread_count(), 3);
  ::setenv("ROUGHFILM_THREADS", "bogus", 1);
  EXPECT_GE(heat_thread_count(), 1);
  ::unsetenv("ROUGHFILM_THREADS");
}

}  // namespace
