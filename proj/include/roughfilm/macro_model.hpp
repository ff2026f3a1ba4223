/**
 * @file macro_model.hpp
 * @brief Macroscopic pressure, average velocity, microrotation and temperature profiles.
 *
 *   p(x1)   = q_l (1/2 - x1) + q_r (x1 + 1/2) + Pr (C(x1) - (x1 + 1/2) C(1/2)),
 *             C(x1) = integral of f1 from -1/2 to x1
 *   U1_av   = a (1 - N) / Pr (q_l - q_r + Pr C(1/2)),   U2_av = 0
 *   W_av    = b g(x1) / L
 *   T_av    = integral of the temperature cell solution (critical), c0 k (subcritical)
 *
 * The pressure form above is an algebraic rearrangement that makes both end
 * values exact in floating point.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "roughfilm/cell_heat.hpp"
#include "roughfilm/cell_laplace.hpp"
#include "roughfilm/cell_stokes.hpp"
#include "roughfilm/errors.hpp"
#include "roughfilm/format.hpp"
#include "roughfilm/functions.hpp"
#include "roughfilm/geometry.hpp"
#include "roughfilm/params.hpp"
#include "roughfilm/quadrature.hpp"
#include "roughfilm/subcritical.hpp"

namespace roughfilm {

enum class RegimeMode { Critical, Subcritical, Auto, Supercritical };
enum class Regime { Critical, Subcritical, Supercritical };

inline const char* to_string(RegimeMode m) {
  switch (m) {
    case RegimeMode::Critical: return "critical";
    case RegimeMode::Subcritical: return "subcritical";
    case RegimeMode::Supercritical: return "supercritical";
    default: return "auto";
  }
}

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Critical: return "critical";
    case Regime::Subcritical: return "subcritical";
    default: return "supercritical";
  }
}

struct RegimeSpec {
  RegimeMode mode = RegimeMode::Auto;
  double lambda = 1.0;
  /// Auto mode treats lambda below this as subcritical. A heuristic: the
  /// regimes themselves are defined only as limits.
  double threshold = 1e-2;
};

/// Regime actually solved for a spec.
inline Regime resolve_regime(const RegimeSpec& spec) {
  switch (spec.mode) {
    case RegimeMode::Critical: return std::isinf(spec.lambda) ? Regime::Supercritical : Regime::Critical;
    case RegimeMode::Subcritical: return Regime::Subcritical;
    case RegimeMode::Supercritical: return Regime::Supercritical;
    default:
      if (std::isinf(spec.lambda)) return Regime::Supercritical;
      return spec.lambda < spec.threshold ? Regime::Subcritical : Regime::Critical;
  }
}

struct Discretization {
  int n1 = 96;
  int n2 = 96;
  int nx1 = 101;
  double tol = 1e-10;
  /// Linear systems above this size leave the direct path.
  int max_unknowns = 200000;
  SurfaceMeasure surface_measure = SurfaceMeasure::Arclength;
  /// Worker threads for per-x1 heat solves; 0 reads ROUGHFILM_THREADS.
  int threads = 0;
};

/// A coefficient and where it came from.
struct Coefficient {
  std::string name;
  double value = 0.0;
  std::string source;

  bool operator==(const Coefficient&) const = default;
};

struct SolverDiagnostic {
  std::string name;
  std::string method;
  int iterations = 0;
  double residual = 0.0;

  bool operator==(const SolverDiagnostic&) const = default;
};

struct MacroReport {
  Regime regime = Regime::Critical;
  double lambda = 0.0;
  std::vector<Coefficient> coefficients;
  std::vector<double> x1;
  std::vector<double> p;
  std::vector<double> U1;
  std::vector<double> U2;
  std::vector<double> W;
  std::vector<double> T;
  /// Named scalar checks (energy identities, divergence residual, ...).
  std::vector<std::pair<std::string, double>> checks;
  std::vector<SolverDiagnostic> solvers;
  std::vector<Warning> warnings;

  const Coefficient* find(const std::string& name) const {
    for (const auto& c : coefficients)
      if (c.name == name) return &c;
    return nullptr;
  }
  double coefficient(const std::string& name) const {
    const auto* c = find(name);
    if (!c) throw Error(ErrorCode::ShapeMismatch, "report has no coefficient " + name);
    return c->value;
  }
  std::optional<double> check(const std::string& name) const {
    for (const auto& [k, v] : checks)
      if (k == name) return v;
    return std::nullopt;
  }

  bool operator==(const MacroReport&) const = default;
};

/// nx1 uniform samples of [-1/2, 1/2] including both ends.
inline std::vector<double> uniform_x1_grid(int nx1) {
  if (nx1 < 2) throw Error(ErrorCode::BadResolution, "nx1 must be at least 2");
  std::vector<double> x(nx1);
  for (int i = 0; i < nx1; ++i) x[i] = -0.5 + static_cast<double>(i) / (nx1 - 1);
  x.back() = 0.5;
  return x;
}

/// Integral of f1 over [-1/2, x] for every sample, and over the whole interval.
struct CumulativeIntegral {
  std::vector<double> at_samples;
  double total = 0.0;
};

inline CumulativeIntegral cumulative_integral(const MacroFunction& f1, const std::vector<double>& x1) {
  std::vector<double> nodes(x1);
  for (double x : nodes)
    if (!(x >= -0.5 && x <= 0.5)) throw Error(ErrorCode::OutOfDomain, "x1 sample outside [-1/2, 1/2]");
  nodes.push_back(-0.5);
  nodes.push_back(0.5);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  const auto breaks = f1.breakpoints();
  std::map<double, double> value{{-0.5, 0.0}};
  double acc = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    acc += integrate([&](double x) { return f1(x); }, nodes[i - 1], nodes[i], 1e-12, breaks);
    value[nodes[i]] = acc;
  }
  CumulativeIntegral out;
  out.total = value.at(0.5);
  for (double x : x1) out.at_samples.push_back(value.at(x));
  return out;
}

inline std::vector<double> pressure_profile(const FluidParams& params, const MacroFunction& f1,
                                            const std::vector<double>& x1) {
  const auto c = cumulative_integral(f1, x1);
  std::vector<double> p(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const double x = x1[i];
    p[i] = params.q_left * (0.5 - x) + params.q_right * (x + 0.5) +
           params.Pr * (c.at_samples[i] - (x + 0.5) * c.total);
  }
  return p;
}

/// U1_av given the total integral of f1.
inline double average_velocity(double a, const FluidParams& params, double f1_integral) {
  return a * (1.0 - params.N) / params.Pr * (params.q_left - params.q_right + params.Pr * f1_integral);
}

inline double average_velocity(double a, const FluidParams& params, const MacroFunction& f1) {
  return average_velocity(a, params, cumulative_integral(f1, {}).total);
}

inline std::vector<double> average_microrotation(double b, const FluidParams& params, const MacroFunction& g,
                                                 const std::vector<double>& x1) {
  std::vector<double> w(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) w[i] = b * g(x1[i]) / params.L;
  return w;
}

/// Cell solutions kept alongside a report, for field dumps.
struct CellFields {
  std::shared_ptr<const StokesCellSolution> stokes;
  std::shared_ptr<const LaplaceCellSolution> laplace;
  std::vector<HeatCellSolution> heat;
};

struct ModelRun {
  MacroReport report;
  CellFields fields;
};

inline SolverDiagnostic diagnostic(const std::string& name, const LinearSolveReport& r) {
  return {name, to_string(r.method), r.iterations, r.residual};
}

inline std::string critical_source(const std::string& problem, const Discretization& d, double lambda) {
  return problem + " cell problem, P2/P1 finite elements, n1=" + std::to_string(d.n1) + ", n2=" +
         std::to_string(d.n2) + ", lambda=" + format_shortest(lambda);
}

inline ModelRun run_model(const RoughnessProfile& profile, const FluidParams& params, const ForcingData& forcing,
                          const RegimeSpec& regime, const Discretization& disc = {}) {
  params.validate();
  ModelRun run;
  MacroReport& rep = run.report;
  rep.regime = resolve_regime(regime);
  rep.lambda = rep.regime == Regime::Subcritical ? 0.0 : regime.lambda;
  rep.x1 = uniform_x1_grid(disc.nx1);
  rep.p = pressure_profile(params, forcing.f1, rep.x1);
  const double f1_total = cumulative_integral(forcing.f1, {}).total;
  rep.U2.assign(rep.x1.size(), 0.0);

  double a = 0.0, b = 0.0;
  switch (rep.regime) {
    case Regime::Subcritical: {
      const auto sub = subcritical_coefficients(profile, forcing.G);
      const auto pi = compute_pi_prime(profile);
      a = sub.a0;
      b = sub.b0;
      const std::string src = "subcritical closed form, adaptive Gauss-Kronrod quadrature";
      rep.coefficients = {{"a", a, src},
                          {"b", b, src},
                          {"c0", sub.c0, src},
                          {"int_h3", sub.int_h3, src},
                          {"int_h6", sub.int_h6, src},
                          {"int_h2G", sub.int_h2G, src},
                          {"harmonic_mean_a", sub.harmonic_mean_a, "diagnostic only: (1/12)(integral h^-3)^-1"}};
      rep.checks = {{"pi_prime_mean", pi.mean}, {"pi_ode_residual", pi_ode_residual(pi)}};
      rep.T.assign(rep.x1.size(), sub.c0 * params.k);
      rep.warnings = sub.warnings;
      break;
    }
    case Regime::Critical: {
      check_lambda(regime.lambda);
      const double lambda = regime.lambda;
      auto space = std::make_shared<const P2Space>(build_mesh(profile, disc.n1, disc.n2));
      SolveOptions lin;
      lin.max_direct_unknowns = disc.max_unknowns;
      auto stokes = std::make_shared<const StokesCellSolution>(
          solve_stokes_cell(space, lambda, disc.tol, StokesSolver::BlockSchur, lin));
      auto laplace = std::make_shared<const LaplaceCellSolution>(solve_laplace_cell(space, lambda, disc.tol, lin));
      if (!(std::abs(stokes->mean_u2) <= 1e-8))
        throw Error(ErrorCode::SolverFailure, "integral of u2 is " + std::to_string(stokes->mean_u2) + ", not zero");
      HeatOptions hopt;
      hopt.tol = disc.tol;
      hopt.surface_measure = disc.surface_measure;
      hopt.linear = lin;
      auto temp = temperature_profile(*laplace, params, forcing.g, forcing.G, rep.x1, hopt, disc.threads);
      a = stokes->a_lambda;
      b = laplace->b_lambda;
      rep.coefficients = {{"a", a, critical_source("Stokes", disc, lambda)},
                          {"b", b, critical_source("Laplace", disc, lambda)}};
      rep.checks = {{"stokes_energy_identity", energy_identity_check(*stokes)},
                    {"laplace_energy_identity", energy_identity_check(*laplace)},
                    {"divergence_residual", stokes->divergence_residual},
                    {"integral_u2", stokes->mean_u2},
                    {"pressure_integral", stokes->pressure_integral},
                    {"max_heat_peclet", 0.0}};
      rep.solvers = {diagnostic("stokes", stokes->solve_report), diagnostic("laplace", laplace->solve_report)};
      double pe = 0.0;
      for (std::size_t i = 0; i < temp.solves.size(); ++i) {
        pe = std::max(pe, temp.solves[i].max_peclet);
        rep.solvers.push_back(diagnostic("heat[" + std::to_string(i) + "]", temp.solves[i].solve_report));
      }
      rep.checks.back().second = pe;
      rep.T = temp.T_av;
      rep.warnings = temp.warnings;
      run.fields.stokes = std::move(stokes);
      run.fields.laplace = std::move(laplace);
      run.fields.heat = std::move(temp.solves);
      break;
    }
    case Regime::Supercritical: {
      const std::string src = "supercritical stub: flow and microrotation vanish in the roughness zone";
      rep.coefficients = {{"a", 0.0, src}, {"b", 0.0, src}};
      rep.T.assign(rep.x1.size(), std::numeric_limits<double>::quiet_NaN());
      rep.warnings.push_back({"UnsupportedRegime",
                              "lambda = +inf is not solved; velocity and microrotation reported as zero, "
                              "temperature left undetermined"});
      break;
    }
  }
  const double u1 = average_velocity(a, params, f1_total);
  rep.U1.assign(rep.x1.size(), u1);
  rep.W = average_microrotation(b, params, forcing.g, rep.x1);
  return run;
}

}  // namespace roughfilm
