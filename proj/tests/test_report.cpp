#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "roughfilm/report.hpp"

using namespace roughfilm;

namespace {

RunConfig config(const std::string& extra = "") {
  return parse_config(R"(
roughness: {kind: cosine, mean: 1.0}
physics: {N: 0.5, Pr: 1.0, L: 1.0, k: 1.0, q_left: 1.0, q_right: 0.0}
forcing: {G: 1.0}
discretization: {n1: 12, n2: 12, nx1: 11}
)" + extra);
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("roughfilm_report_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(Report, RoundTripsLosslessly) {
  const auto c = config("regime: {mode: critical, lambda: 0.7}\n");
  const auto run = run_config(c);
  const auto file = make_report_file(run.report, c);
  const auto text = serialize_report(file);
  const auto back = parse_report(text);
  EXPECT_TRUE(back.report == file.report);
  EXPECT_TRUE(back.metadata == file.metadata);
  EXPECT_EQ(back.config, file.config);
  EXPECT_EQ(serialize_report(back), text);
}

TEST(Report, NaNAndInfinitySurviveRoundTrip) {
  const auto c = config("regime: {mode: supercritical}\n");
  const auto file = make_report_file(run_config(c).report, c);
  const auto text = serialize_report(file);
  EXPECT_NE(text.find("\"lambda\": \"inf\""), std::string::npos);
  const auto back = parse_report(text);
  EXPECT_TRUE(std::isinf(back.report.lambda));
  for (double t : back.report.T) EXPECT_TRUE(std::isnan(t));
  EXPECT_EQ(serialize_report(back), text);
}

TEST(Report, MalformedReportIsParseError) {
  EXPECT_THROW((void)parse_report("{"), Error);
  EXPECT_THROW((void)parse_report("{\"metadata\": {}}"), Error);
}

TEST(Report, TimestampHonoursSourceDateEpoch) {
  ::setenv("SOURCE_DATE_EPOCH", "0", 1);
  EXPECT_EQ(report_timestamp(), "1970-01-01T00:00:00Z");
  ::unsetenv("SOURCE_DATE_EPOCH");
  EXPECT_EQ(report_timestamp().size(), 20u);
}

TEST(Emit, ProfilesTableShape) {
  const auto c = config("regime: {mode: subcritical}\n");
  const auto dir = scratch("profiles");
  EmitOptions opt = EmitOptions::from(c.output);
  opt.directory = dir;
  const auto written = emit(run_config(c), c, opt);
  ASSERT_EQ(written.size(), 2u);
  const auto rows = lines_of(dir / "profiles.csv");
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0], "x1,p,U1_av,U2_av,W_av,T_av");
  // Flat wall, q = (1, 0): p(0) = 0.5, U1 = 1/24, T = 1/2.
  EXPECT_EQ(rows[6], "0,0.5,0.0416666666667,0,0,0.5");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream ss(rows[i]);
    std::string cell;
    for (int col = 0; col < 4; ++col) std::getline(ss, cell, ',');
    EXPECT_EQ(cell, "0");
  }
  std::filesystem::remove_all(dir);
}

TEST(Emit, PrecisionIsConfigurable) {
  const auto c = config("regime: {mode: subcritical}\noutput: {precision: 4, formats: csv}\n");
  const auto dir = scratch("precision");
  EmitOptions opt = EmitOptions::from(c.output);
  opt.directory = dir;
  const auto written = emit(run_config(c), c, opt);
  ASSERT_EQ(written.size(), 1u);
  EXPECT_EQ(lines_of(dir / "profiles.csv")[6], "0,0.5,0.04167,0,0,0.5");
  std::filesystem::remove_all(dir);
}

TEST(Emit, FieldDumpsOnePerCellSolve) {
  auto c = config("regime: {mode: critical, lambda: 1.0}\noutput: {dump_fields: true}\n");
  c.physics.D = 1.0;
  c.forcing.g = MacroFunction(PolynomialForm{{0.0, 1.0}});
  const auto dir = scratch("fields");
  const auto run = run_config(c);
  const auto written = emit(run, c, {dir, true, true, true, 12});
  EXPECT_EQ(written.size(), 2u + 2u + run.fields.heat.size());
  EXPECT_TRUE(std::filesystem::exists(dir / "stokes.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "laplace.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "heat_000.csv"));
  EXPECT_EQ(run.fields.heat.size(), 11u);
  std::filesystem::remove_all(dir);
}

TEST(Emit, UnwritableDirectoryIsIoError) {
  const auto c = config("regime: {mode: subcritical}\n");
  try {
    (void)emit(run_config(c), c, {"/proc/roughfilm/out", true, true, false, 12});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Determinism, IdenticalConfigsGiveIdenticalReports) {
  const auto c = config("regime: {mode: critical, lambda: 1.0}\n");
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const auto a = serialize_report(make_report_file(run_config(c).report, c));
  const auto b = serialize_report(make_report_file(run_config(c).report, c));
  ::unsetenv("SOURCE_DATE_EPOCH");
  EXPECT_EQ(a, b);
}

TEST(Sweep, FlatWallRowsAndSubcriticalRow) {
  const auto c = config();
  const auto rows = sweep(c, {2.0, 0.5, 1.0});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].lambda, 0.5);
  EXPECT_EQ(rows[2].lambda, 2.0);
  EXPECT_EQ(rows[3].lambda, 0.0);
  EXPECT_EQ(rows[3].regime, Regime::Subcritical);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.a, 1.0 / 12.0, 1e-12);
    EXPECT_NEAR(r.b, 1.0 / 12.0, 1e-12);
  }
}

TEST(Sweep, EmptyListGivesOnlySubcriticalRow) {
  const auto rows = sweep(config(), {});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].regime, Regime::Subcritical);
}

TEST(Sweep, RerunColumnsAndCsv) {
  auto c = config();
  c.roughness = cosine_profile(1.0, 0.5);
  const auto rows = sweep(c, {1.0}, {true});
  ASSERT_TRUE(rows[0].rerun_delta_a.has_value());
  EXPECT_LT(*rows[0].rerun_delta_a, 0.0);  // the coefficient decreases under refinement
  EXPECT_FALSE(rows[1].rerun_delta_a.has_value());
  std::ostringstream os;
  write_sweep_csv(rows, os);
  std::istringstream is(os.str());
  std::string header, first, last;
  std::getline(is, header);
  std::getline(is, first);
  std::getline(is, last);
  EXPECT_EQ(header, "lambda,regime,a,b,rerun_delta_a,rerun_delta_b");
  EXPECT_EQ(first.substr(0, 11), "1,critical,");
  EXPECT_EQ(last.substr(0, 14), "0,subcritical,");
  EXPECT_EQ(last.back(), ',');
}

TEST(Sweep, RejectsNonPositiveLambda) {
  EXPECT_THROW((void)sweep(config(), {1.0, 0.0}), Error);
  EXPECT_THROW((void)sweep(config(), {std::numeric_limits<double>::infinity()}), Error);
}

}  // namespace
