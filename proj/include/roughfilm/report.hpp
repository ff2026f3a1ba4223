/**
 * @file report.hpp
 * @brief JSON report, profiles CSV, cell-field dumps and lambda sweeps.
 *
 * JSON numbers are written in shortest round-trip form so parse_report
 * recovers every double exactly; NaN is written as null and infinities as
 * the strings "inf" / "-inf". The CSV tables use the configured precision.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roughfilm/config.hpp"
#include "roughfilm/errors.hpp"
#include "roughfilm/format.hpp"
#include "roughfilm/macro_model.hpp"

#ifndef ROUGHFILM_VERSION
#define ROUGHFILM_VERSION "0.0.0"
#endif

namespace roughfilm {

inline constexpr const char* kToolName = "roughfilm";

struct ReportMetadata {
  std::string tool = kToolName;
  std::string version = ROUGHFILM_VERSION;
  std::string config_hash;
  std::string timestamp;

  bool operator==(const ReportMetadata&) const = default;
};

struct ReportFile {
  ReportMetadata metadata;
  nlohmann::ordered_json config;
  MacroReport report;
};

/// UTC time in ISO 8601. SOURCE_DATE_EPOCH, when set, replaces the clock.
inline std::string report_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline nlohmann::ordered_json real(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double real(const nlohmann::ordered_json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::ParseError, "report: '" + s + "' is not a number");
  }
  return j.get<double>();
}

inline nlohmann::ordered_json reals(const std::vector<double>& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

inline std::vector<double> reals(const nlohmann::ordered_json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(real(x));
  return v;
}

inline Regime regime_from_string(const std::string& s) {
  if (s == "critical") return Regime::Critical;
  if (s == "subcritical") return Regime::Subcritical;
  if (s == "supercritical") return Regime::Supercritical;
  throw Error(ErrorCode::ParseError, "report: unknown regime " + s);
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const ReportFile& f) {
  using json = nlohmann::ordered_json;
  const MacroReport& r = f.report;
  json coefficients = json::array();
  for (const auto& c : r.coefficients)
    coefficients.push_back({{"name", c.name}, {"value", detail::real(c.value)}, {"source", c.source}});
  json checks = json::array();
  for (const auto& [name, v] : r.checks) checks.push_back({{"name", name}, {"value", detail::real(v)}});
  json solvers = json::array();
  for (const auto& s : r.solvers)
    solvers.push_back({{"name", s.name},
                       {"method", s.method},
                       {"iterations", s.iterations},
                       {"residual", detail::real(s.residual)}});
  json warnings = json::array();
  for (const auto& w : r.warnings) warnings.push_back({{"code", w.code}, {"message", w.message}});
  return {
      {"metadata",
       {{"tool", f.metadata.tool},
        {"version", f.metadata.version},
        {"config_hash", f.metadata.config_hash},
        {"timestamp", f.metadata.timestamp}}},
      {"config", f.config},
      {"regime", {{"name", to_string(r.regime)}, {"lambda", detail::real(r.lambda)}}},
      {"coefficients", coefficients},
      {"profiles",
       {{"x1", detail::reals(r.x1)},
        {"p", detail::reals(r.p)},
        {"U1_av", detail::reals(r.U1)},
        {"U2_av", detail::reals(r.U2)},
        {"W_av", detail::reals(r.W)},
        {"T_av", detail::reals(r.T)}}},
      {"diagnostics", {{"checks", checks}, {"solvers", solvers}, {"warnings", warnings}}},
  };
}

inline std::string serialize_report(const ReportFile& f) { return report_json(f).dump(2) + "\n"; }

inline ReportFile parse_report(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
  try {
    ReportFile f;
    const auto& m = j.at("metadata");
    f.metadata = {m.at("tool").get<std::string>(), m.at("version").get<std::string>(),
                  m.at("config_hash").get<std::string>(), m.at("timestamp").get<std::string>()};
    f.config = j.at("config");
    MacroReport& r = f.report;
    r.regime = detail::regime_from_string(j.at("regime").at("name").get<std::string>());
    r.lambda = detail::real(j.at("regime").at("lambda"));
    for (const auto& c : j.at("coefficients"))
      r.coefficients.push_back({c.at("name").get<std::string>(), detail::real(c.at("value")),
                                c.at("source").get<std::string>()});
    const auto& p = j.at("profiles");
    r.x1 = detail::reals(p.at("x1"));
    r.p = detail::reals(p.at("p"));
    r.U1 = detail::reals(p.at("U1_av"));
    r.U2 = detail::reals(p.at("U2_av"));
    r.W = detail::reals(p.at("W_av"));
    r.T = detail::reals(p.at("T_av"));
    const auto& d = j.at("diagnostics");
    for (const auto& c : d.at("checks")) r.checks.emplace_back(c.at("name").get<std::string>(), detail::real(c.at("value")));
    for (const auto& s : d.at("solvers"))
      r.solvers.push_back({s.at("name").get<std::string>(), s.at("method").get<std::string>(),
                           s.at("iterations").get<int>(), detail::real(s.at("residual"))});
    for (const auto& w : d.at("warnings"))
      r.warnings.push_back({w.at("code").get<std::string>(), w.at("message").get<std::string>()});
    return f;
  } catch (const nlohmann::ordered_json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
}

inline ReportFile make_report_file(const MacroReport& report, const RunConfig& config) {
  ReportFile f;
  f.metadata.config_hash = config_hash(config);
  f.metadata.timestamp = report_timestamp();
  f.config = nlohmann::ordered_json::parse(canonical_config(config).dump());
  f.report = report;
  return f;
}

/// Profiles table: header x1,p,U1_av,U2_av,W_av,T_av and one row per x1 sample.
inline void write_profiles_csv(const MacroReport& r, std::ostream& os, int precision = 12) {
  os << "x1,p,U1_av,U2_av,W_av,T_av\n";
  for (std::size_t i = 0; i < r.x1.size(); ++i) {
    os << format_precision(r.x1[i], precision) << ',' << format_precision(r.p[i], precision) << ','
       << format_precision(r.U1[i], precision) << ',' << format_precision(r.U2[i], precision) << ','
       << format_precision(r.W[i], precision) << ',' << format_precision(r.T[i], precision) << '\n';
  }
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  return os;
}

inline void finish_output(std::ofstream& os, const std::filesystem::path& p) {
  os.flush();
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + p.string());
}

}  // namespace detail

struct EmitOptions {
  std::filesystem::path directory = "out";
  bool json = true;
  bool csv = true;
  bool dump_fields = false;
  int precision = 12;

  static EmitOptions from(const OutputOptions& o) { return {o.directory, o.json, o.csv, o.dump_fields, o.precision}; }
};

/// Writes report.json, profiles.csv and, if requested, one grid CSV per cell
/// solve (stokes.csv, laplace.csv, heat_000.csv, ...). Returns the paths written.
inline std::vector<std::filesystem::path> emit(const ModelRun& run, const RunConfig& config, const EmitOptions& opt) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(opt.directory, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + opt.directory.string() + ": " + ec.message());
  std::vector<fs::path> written;
  auto write = [&](const std::string& name, auto&& body) {
    const fs::path p = opt.directory / name;
    auto os = detail::open_output(p);
    body(os);
    detail::finish_output(os, p);
    written.push_back(p);
  };
  if (opt.json) write("report.json", [&](std::ostream& os) { os << serialize_report(make_report_file(run.report, config)); });
  if (opt.csv) write("profiles.csv", [&](std::ostream& os) { write_profiles_csv(run.report, os, opt.precision); });
  if (opt.dump_fields) {
    if (run.fields.stokes) write("stokes.csv", [&](std::ostream& os) { write_stokes_fields(*run.fields.stokes, os, opt.precision); });
    if (run.fields.laplace)
      write("laplace.csv", [&](std::ostream& os) { write_laplace_fields(*run.fields.laplace, os, opt.precision); });
    for (std::size_t i = 0; i < run.fields.heat.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "heat_%03zu.csv", i);
      write(name, [&](std::ostream& os) { write_heat_fields(run.fields.heat[i], os, opt.precision); });
    }
  }
  return written;
}

/// Runs the model described by a config.
inline ModelRun run_config(const RunConfig& config) {
  return run_model(make_profile(config.roughness), config.physics, config.forcing, config.regime,
                   config.discretization);
}

struct SweepRow {
  double lambda = 0.0;
  Regime regime = Regime::Critical;
  double a = 0.0;
  double b = 0.0;
  /// Filled when the row was rerun at doubled resolution: the change in a and
  /// b against the finer grid.
  std::optional<double> rerun_delta_a;
  std::optional<double> rerun_delta_b;
};

struct SweepOptions {
  /// Re-solve each critical row with n1 and n2 doubled (capped at 1024).
  bool rerun = false;
};

/// One critical cell solve per lambda, ascending, followed by the
/// subcritical lambda = 0 row.
inline std::vector<SweepRow> sweep(const RunConfig& config, std::vector<double> lambdas, const SweepOptions& opt = {}) {
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l))
      throw Error(ErrorCode::DegenerateLambda, "sweep lambda " + format_shortest(l) + " must be positive and finite");
  std::sort(lambdas.begin(), lambdas.end());
  const RoughnessProfile profile = make_profile(config.roughness);
  const Discretization& d = config.discretization;
  SolveOptions lin;
  lin.max_direct_unknowns = d.max_unknowns;
  auto space = std::make_shared<const P2Space>(build_mesh(profile, d.n1, d.n2));
  std::shared_ptr<const P2Space> fine;
  if (opt.rerun)
    fine = std::make_shared<const P2Space>(
        build_mesh(profile, std::min(2 * d.n1, kMaxResolution), std::min(2 * d.n2, kMaxResolution)));
  std::vector<SweepRow> rows;
  for (double l : lambdas) {
    SweepRow row;
    row.lambda = l;
    row.a = solve_stokes_cell(space, l, d.tol, StokesSolver::BlockSchur, lin).a_lambda;
    row.b = solve_laplace_cell(space, l, d.tol, lin).b_lambda;
    if (fine) {
      row.rerun_delta_a = solve_stokes_cell(fine, l, d.tol, StokesSolver::BlockSchur, lin).a_lambda - row.a;
      row.rerun_delta_b = solve_laplace_cell(fine, l, d.tol, lin).b_lambda - row.b;
    }
    rows.push_back(row);
  }
  const auto sub = subcritical_coefficients(profile, config.forcing.G);
  SweepRow zero;
  zero.regime = Regime::Subcritical;
  zero.a = sub.a0;
  zero.b = sub.b0;
  rows.push_back(zero);
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os, int precision = 12) {
  os << "lambda,regime,a,b,rerun_delta_a,rerun_delta_b\n";
  auto opt = [&](const std::optional<double>& v) { return v ? format_precision(*v, precision) : std::string(); };
  for (const auto& r : rows)
    os << format_precision(r.lambda, precision) << ',' << to_string(r.regime) << ',' << format_precision(r.a, precision)
       << ',' << format_precision(r.b, precision) << ',' << opt(r.rerun_delta_a) << ',' << opt(r.rerun_delta_b) << '\n';
}

inline std::filesystem::path emit_sweep(const std::vector<SweepRow>& rows, const EmitOptions& opt) {
  std::error_code ec;
  std::filesystem::create_directories(opt.directory, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + opt.directory.string() + ": " + ec.message());
  const auto p = opt.directory / "sweep.csv";
  auto os = detail::open_output(p);
  write_sweep_csv(rows, os, opt.precision);
  detail::finish_output(os, p);
  return p;
}

}  // namespace roughfilm
