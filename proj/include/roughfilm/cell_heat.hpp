/**
 * @file cell_heat.hpp
 * @brief Temperature cell problem of the critical regime and the profile T_av(x1).
 *
 *   -Delta_lambda T - s (grad_lambda^perp w . grad_lambda T) = 0  in Z,
 *   T = 0 on z2 = 0,  flux k G(z1) on z2 = h(z1),  Z'-periodic in z1,
 *
 * with s = (D / L) g(x1) and grad^perp = (d2, -d1). The drift
 * beta = lambda (d2 w, -d1 w) is divergence free and tangential to both walls.
 * For fixed x1 the problem is linear, so each x1 costs one sparse solve.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "roughfilm/cell_laplace.hpp"
#include "roughfilm/errors.hpp"
#include "roughfilm/fem.hpp"
#include "roughfilm/functions.hpp"
#include "roughfilm/params.hpp"
#include "roughfilm/sparse.hpp"

namespace roughfilm {

/// Surface element of the top-wall flux term: Euclidean arclength
/// sqrt(1 + h'^2) dz1, or the projected length dz1.
enum class SurfaceMeasure { Arclength, Flat };

inline const char* to_string(SurfaceMeasure m) { return m == SurfaceMeasure::Flat ? "flat" : "arclength"; }

struct FluxSample {
  double z1 = 0.0;
  double value = 0.0;  // k G(z1)
};

struct HeatOptions {
  double tol = 1e-10;
  SurfaceMeasure surface_measure = SurfaceMeasure::Arclength;
  /// Element Peclet number above which streamline diffusion is added.
  double peclet_threshold = 2.0;
  SolveOptions linear;
};

struct HeatCellSolution {
  std::shared_ptr<const P2Space> space;
  double lambda = 0.0;
  double drift_scale = 0.0;
  double k = 0.0;
  std::vector<double> T;  // P2 lattice values
  double T_av_contrib = 0.0;  // integral of T over Z
  std::vector<FluxSample> flux_data;  // one per top vertex
  int upwinded_elements = 0;
  double max_peclet = 0.0;
  std::vector<Warning> warnings;
  LinearSolveReport solve_report;
};

namespace detail {

/// Element Peclet number |V| (h/2) / eps, with h/2 the P2 node spacing and eps
/// the diffusivity of Lambda = diag(lambda^2, 1) along V.
inline double element_peclet(double vx, double vy, double lambda, double diameter) {
  const double v2 = vx * vx + vy * vy;
  if (v2 == 0.0) return 0.0;
  const double eps = (lambda * lambda * vx * vx + vy * vy) / v2;
  return std::sqrt(v2) * 0.5 * diameter / eps;
}

}  // namespace detail

inline HeatCellSolution solve_heat_cell(const LaplaceCellSolution& w_cell, double drift_scale, double k,
                                        const MacroFunction& G, const HeatOptions& opt = {}) {
  const double lambda = w_cell.lambda;
  check_lambda(lambda);
  if (!w_cell.space) throw Error(ErrorCode::ShapeMismatch, "Laplace cell solution carries no space");
  if (!(k >= 0.0) || !std::isfinite(k)) throw Error(ErrorCode::ValidationError, "k must be finite and non-negative");
  if (!std::isfinite(drift_scale)) throw Error(ErrorCode::NonFinite, "drift scale is not finite");
  const P2Space& sp = *w_cell.space;
  const CellMesh& mesh = sp.mesh();
  if (static_cast<int>(w_cell.w.size()) != sp.num_nodes())
    throw Error(ErrorCode::ShapeMismatch, "w field does not match the cell space");

  const DofMap dofs = DofMap::walls(sp, false);
  const int n = dofs.count;
  HeatCellSolution sol;
  sol.lambda = lambda;
  sol.drift_scale = drift_scale;
  sol.k = k;

  TripletBuilder builder(n, n);
  builder.reserve(sp.elements().size() * 36);
  const double l2 = lambda * lambda;
  for (const auto& e : sp.elements()) {
    std::array<std::array<double, 6>, 6> a{};
    // Velocity at the centroid decides whether the element is upwinded.
    double cvx = 0.0, cvy = 0.0;
    {
      const ShapeSample c = P2Space::sample(e, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1.0);
      for (int b = 0; b < 6; ++b) {
        cvx -= drift_scale * lambda * c.dy[b] * w_cell.w[e.nodes[b]];
        cvy += drift_scale * lambda * c.dx[b] * w_cell.w[e.nodes[b]];
      }
    }
    const double pe = detail::element_peclet(cvx, cvy, lambda, e.diameter);
    sol.max_peclet = std::max(sol.max_peclet, pe);
    double added = 0.0;
    if (pe > opt.peclet_threshold) {
      // Streamline diffusion lifting the along-stream diffusivity to the
      // first-order upwind value |V| h / 2 on the P2 node spacing.
      const double v2 = cvx * cvx + cvy * cvy;
      const double eps = (l2 * cvx * cvx + cvy * cvy) / v2;
      added = (std::sqrt(v2) * 0.25 * e.diameter - eps) / v2;
      ++sol.upwinded_elements;
    }
    sp.for_each_point(e, [&](const ShapeSample& s) {
      double wx = 0.0, wy = 0.0;
      for (int b = 0; b < 6; ++b) {
        wx += s.dx[b] * w_cell.w[e.nodes[b]];
        wy += s.dy[b] * w_cell.w[e.nodes[b]];
      }
      // Advective velocity of -div(Lambda grad T) + V . grad T = 0.
      const double vx = -drift_scale * lambda * wy;
      const double vy = drift_scale * lambda * wx;
      for (int r = 0; r < 6; ++r) {
        const double sr = cvx * s.dx[r] + cvy * s.dy[r];
        for (int c = 0; c < 6; ++c)
          a[r][c] += s.weight * (l2 * s.dx[r] * s.dx[c] + s.dy[r] * s.dy[c] +
                                 s.phi[r] * (vx * s.dx[c] + vy * s.dy[c]) +
                                 added * sr * (cvx * s.dx[c] + cvy * s.dy[c]));
      }
    });
    for (int r = 0; r < 6; ++r) {
      const int dr = dofs.dof[e.nodes[r]];
      if (dr < 0) continue;
      for (int c = 0; c < 6; ++c) {
        const int dc = dofs.dof[e.nodes[c]];
        if (dc >= 0) builder.add(dr, dc, a[r][c]);
      }
    }
  }
  if (sol.upwinded_elements > 0)
    sol.warnings.push_back({"AdvectionDominated",
                            std::to_string(sol.upwinded_elements) + " elements exceed Peclet " +
                                std::to_string(opt.peclet_threshold) + " (max " + std::to_string(sol.max_peclet) +
                                "); streamline diffusion engaged"});

  // Top-wall flux k integral G phi dsigma along the true profile.
  std::vector<double> rhs(n, 0.0);
  const int top = sp.lattice_z2() - 1;
  const RoughnessProfile& profile = mesh.profile();
  using Gauss = boost::math::quadrature::gauss<double, 5>;
  for (int i = 0; i < mesh.n1(); ++i) {
    const double za = mesh.z1(i);
    const double dz = mesh.dz1();
    const int ids[3] = {sp.node(2 * i, top), sp.node(2 * i + 1, top), sp.node(2 * i + 2, top)};
    auto density = [&](double z) {
      const double dsigma =
          opt.surface_measure == SurfaceMeasure::Arclength ? std::sqrt(1.0 + std::pow(profile.dh(z), 2)) : 1.0;
      return k * G(z) * dsigma;
    };
    auto basis = [](int m, double t) {
      switch (m) {
        case 0: return (1.0 - t) * (1.0 - 2.0 * t);
        case 1: return 4.0 * t * (1.0 - t);
        default: return t * (2.0 * t - 1.0);
      }
    };
    for (int m = 0; m < 3; ++m) {
      const double v = Gauss::integrate([&](double t) { return density(za + t * dz) * basis(m, t); }, 0.0, 1.0) * dz;
      rhs[dofs.dof[ids[m]]] += v;
    }
    sol.flux_data.push_back({za, k * G(za)});
  }

  SolveOptions lin = opt.linear;
  lin.tol = opt.tol;
  LinearSolveResult result;
  try {
    result = solve(builder.build(), rhs, lin);
  } catch (const Error& err) {
    throw Error(ErrorCode::SolverFailure, std::string("heat cell solve: ") + err.what());
  }
  sol.space = w_cell.space;
  sol.T = expand_from_dofs(dofs, result.solution);
  for (double v : sol.T)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "temperature field is not finite");
  sol.T_av_contrib = p2_integral(sp, sol.T);
  sol.solve_report = std::move(result.report);
  return sol;
}

/// Number of worker threads for per-x1 heat solves: ROUGHFILM_THREADS when set
/// to a positive integer, otherwise the hardware concurrency.
inline int heat_thread_count() {
  if (const char* env = std::getenv("ROUGHFILM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct TemperatureProfile {
  std::vector<double> x1;
  std::vector<double> T_av;
  std::vector<double> drift_scale;
  /// One solution per distinct drift scale, ordered by drift scale.
  std::vector<HeatCellSolution> solves;
  std::vector<Warning> warnings;
};

/// T_av(x1) for every sample, with drift scale (D / L) g(x1). Samples sharing a
/// drift scale share one solve.
inline TemperatureProfile temperature_profile(const LaplaceCellSolution& w_cell, const FluidParams& params,
                                              const MacroFunction& g, const MacroFunction& G,
                                              const std::vector<double>& x1_samples, const HeatOptions& opt = {},
                                              int threads = 0) {
  TemperatureProfile out;
  std::map<double, std::size_t> unique;
  for (double x : x1_samples) {
    if (!(x >= -0.5 && x <= 0.5)) throw Error(ErrorCode::OutOfDomain, "x1 sample outside [-1/2, 1/2]");
    const double s = params.D / params.L * g(x);
    if (!std::isfinite(s)) throw Error(ErrorCode::NonFinite, "drift scale is not finite");
    out.x1.push_back(x);
    out.drift_scale.push_back(s == 0.0 ? 0.0 : s);
    unique.emplace(out.drift_scale.back(), 0);
  }
  std::vector<double> scales;
  for (auto& [s, idx] : unique) {
    idx = scales.size();
    scales.push_back(s);
  }

  out.solves.resize(scales.size());
  const int workers = std::max(1, std::min<int>(threads > 0 ? threads : heat_thread_count(),
                                                 static_cast<int>(scales.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (std::size_t i = next++; i < scales.size(); i = next++) {
      try {
        out.solves[i] = solve_heat_cell(w_cell, scales[i], params.k, G, opt);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  for (double s : out.drift_scale) out.T_av.push_back(out.solves[unique.at(s)].T_av_contrib);
  for (const auto& s : out.solves)
    for (const auto& w : s.warnings) out.warnings.push_back(w);
  return out;
}

/// CSV rows "z1,z2,T" over the P2 lattice.
inline void write_heat_fields(const HeatCellSolution& sol, std::ostream& os, int precision = 12) {
  const P2Space& sp = *sol.space;
  os << "z1,z2,T\n" << std::setprecision(precision);
  for (int I = 0; I < sp.lattice_z1(); ++I)
    for (int J = 0; J < sp.lattice_z2(); ++J) {
      const Point2 x = sp.node_position(I, J);
      os << x.x << ',' << x.y << ',' << sol.T[sp.node(I, J)] << '\n';
    }
}

}  // namespace roughfilm
