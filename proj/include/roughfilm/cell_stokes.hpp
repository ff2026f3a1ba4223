/**
 * @file cell_stokes.hpp
 * @brief Periodic Stokes cell problem of the critical regime and the coefficient a_lambda.
 *
 *   -Delta_lambda u + grad_lambda pi = e1,  div_lambda u = 0  in Z,
 *   u = 0 on z2 = 0 and z2 = h(z1),  Z'-periodic in z1,
 *
 * with grad_lambda = (lambda d1, d2). Taylor-Hood P2/P1 elements on the
 * terrain-following triangulation; the pressure constant is fixed by
 * zero mean, through the Schur iteration or a bordering multiplier row.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "roughfilm/errors.hpp"
#include "roughfilm/fem.hpp"
#include "roughfilm/sparse.hpp"

namespace roughfilm {

struct StokesCellSolution {
  std::shared_ptr<const P2Space> space;
  double lambda = 0.0;
  std::vector<double> u1;  // P2 lattice values
  std::vector<double> u2;
  std::vector<double> pi;  // P1 vertex values
  double a_lambda = 0.0;
  double energy = 0.0;   // integral of |grad_lambda u|^2
  double mean_u1 = 0.0;  // integral of u1
  double mean_u2 = 0.0;  // integral of u2, zero up to round-off without being imposed
  double pressure_integral = 0.0;
  double divergence_residual = 0.0;  // max over vertices of |weak div_lambda u| / patch area
  LinearSolveReport solve_report;
};

inline void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::DegenerateLambda, "lambda must be positive and finite, got " + std::to_string(lambda));
}

/// Weak divergence rows: entry (k, a) holds -integral psi_k lambda d1(phi_a) for
/// component 1 and -integral psi_k d2(phi_a) for component 2.
struct DivergenceBlocks {
  std::vector<Triplet> b1;
  std::vector<Triplet> b2;
};

inline DivergenceBlocks assemble_divergence(const P2Space& space, double lambda) {
  DivergenceBlocks out;
  out.b1.reserve(space.elements().size() * 18);
  out.b2.reserve(space.elements().size() * 18);
  for (const auto& e : space.elements()) {
    std::array<std::array<double, 6>, 3> l1{}, l2{};
    space.for_each_point(e, [&](const ShapeSample& s) {
      for (int k = 0; k < 3; ++k)
        for (int a = 0; a < 6; ++a) {
          l1[k][a] -= s.weight * s.psi[k] * lambda * s.dx[a];
          l2[k][a] -= s.weight * s.psi[k] * s.dy[a];
        }
    });
    for (int k = 0; k < 3; ++k)
      for (int a = 0; a < 6; ++a) {
        out.b1.push_back({e.vertices[k], e.nodes[a], l1[k][a]});
        out.b2.push_back({e.vertices[k], e.nodes[a], l2[k][a]});
      }
  }
  return out;
}

/// Max over vertices of |integral psi_k div_lambda u| / integral psi_k.
inline double divergence_residual(const P2Space& space, double lambda, const std::vector<double>& u1,
                                  const std::vector<double>& u2) {
  const auto blocks = assemble_divergence(space, lambda);
  std::vector<double> r(space.num_vertices(), 0.0);
  for (const auto& t : blocks.b1) r[t.row] += t.value * u1[t.col];
  for (const auto& t : blocks.b2) r[t.row] += t.value * u2[t.col];
  const auto m = p1_load(space);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) worst = std::max(worst, std::abs(r[k]) / m[k]);
  return worst;
}

/// BlockSchur factors the viscous block once and iterates on the pressure;
/// Monolithic hands the whole saddle-point system, bordered by the zero-mean
/// multiplier row, to the generic sparse solve (practical for small grids).
enum class StokesSolver { BlockSchur, Monolithic };

inline StokesCellSolution solve_stokes_cell(std::shared_ptr<const P2Space> space, double lambda,
                                            double tol = 1e-10, StokesSolver solver = StokesSolver::BlockSchur,
                                            SolveOptions options = {}) {
  check_lambda(lambda);
  const P2Space& sp = *space;
  const DofMap dofs = DofMap::walls(sp, true);
  const int nv = dofs.count;
  const int np = sp.num_vertices();

  std::vector<Triplet> stiff = assemble_stiffness(sp, dofs, lambda);
  const auto div = assemble_divergence(sp, lambda);
  std::vector<Triplet> b1, b2;
  b1.reserve(div.b1.size());
  b2.reserve(div.b2.size());
  for (const auto& t : div.b1)
    if (dofs.dof[t.col] >= 0) b1.push_back({t.row, dofs.dof[t.col], t.value});
  for (const auto& t : div.b2)
    if (dofs.dof[t.col] >= 0) b2.push_back({t.row, dofs.dof[t.col], t.value});
  const std::vector<double> f = restrict_to_dofs(dofs, p2_load(sp));

  options.tol = tol;
  std::vector<double> v1, v2, pressure;
  LinearSolveReport report;
  std::vector<Triplet> mass = p1_mass(sp);
  const auto mass_p = p1_load(sp);
  try {
    if (solver == StokesSolver::BlockSchur) {
      SaddlePointSystem sys;
      sys.stiffness = SparseMatrix::from_triplets(nv, nv, std::move(stiff));
      sys.divergence.push_back(SparseMatrix::from_triplets(np, nv, std::move(b1)));
      sys.divergence.push_back(SparseMatrix::from_triplets(np, nv, std::move(b2)));
      sys.pressure_mass = SparseMatrix::from_triplets(np, np, std::move(mass));
      sys.loads = {f, std::vector<double>(nv, 0.0)};
      auto res = solve_saddle_point(sys, options);
      v1 = std::move(res.velocity[0]);
      v2 = std::move(res.velocity[1]);
      pressure = std::move(res.pressure);
      report = std::move(res.report);
    } else {
      // Interleaved velocity (2d, 2d+1), then pressure, then the multiplier.
      const int p0 = 2 * nv;
      const int mult = p0 + np;
      const int n = mult + 1;
      TripletBuilder builder(n, n);
      builder.reserve(2 * stiff.size() + 2 * (b1.size() + b2.size()) + 2 * np);
      for (const auto& t : stiff) {
        builder.add(2 * t.row, 2 * t.col, t.value);
        builder.add(2 * t.row + 1, 2 * t.col + 1, t.value);
      }
      for (const auto& t : b1) {
        builder.add(p0 + t.row, 2 * t.col, t.value);
        builder.add(2 * t.col, p0 + t.row, t.value);
      }
      for (const auto& t : b2) {
        builder.add(p0 + t.row, 2 * t.col + 1, t.value);
        builder.add(2 * t.col + 1, p0 + t.row, t.value);
      }
      for (int kv = 0; kv < np; ++kv) {
        builder.add(mult, p0 + kv, mass_p[kv]);
        builder.add(p0 + kv, mult, mass_p[kv]);
      }
      std::vector<double> rhs(n, 0.0);
      for (int d = 0; d < nv; ++d) rhs[2 * d] = f[d];
      auto res = solve(builder.build(), rhs, options);
      v1.resize(nv);
      v2.resize(nv);
      for (int d = 0; d < nv; ++d) {
        v1[d] = res.solution[2 * d];
        v2[d] = res.solution[2 * d + 1];
      }
      pressure.assign(res.solution.begin() + p0, res.solution.begin() + mult);
      report = std::move(res.report);
    }
  } catch (const Error& err) {
    throw Error(ErrorCode::SolverFailure, std::string("Stokes cell solve: ") + err.what());
  }

  StokesCellSolution sol;
  sol.space = std::move(space);
  sol.lambda = lambda;
  sol.u1 = expand_from_dofs(dofs, v1);
  sol.u2 = expand_from_dofs(dofs, v2);
  sol.pi = std::move(pressure);
  sol.energy = p2_energy(sp, lambda, sol.u1) + p2_energy(sp, lambda, sol.u2);
  sol.a_lambda = sol.energy;
  sol.mean_u1 = p2_integral(sp, sol.u1);
  sol.mean_u2 = p2_integral(sp, sol.u2);
  for (int kv = 0; kv < np; ++kv) sol.pressure_integral += mass_p[kv] * sol.pi[kv];
  sol.divergence_residual = divergence_residual(sp, lambda, sol.u1, sol.u2);
  sol.solve_report = std::move(report);
  if (!(sol.a_lambda > 0.0)) throw Error(ErrorCode::SolverFailure, "non-positive a_lambda");
  return sol;
}

inline StokesCellSolution solve_stokes_cell(const CellMesh& mesh, double lambda, double tol = 1e-10,
                                            StokesSolver solver = StokesSolver::BlockSchur,
                                            SolveOptions options = {}) {
  return solve_stokes_cell(std::make_shared<const P2Space>(mesh), lambda, tol, solver, options);
}

/// Relative mismatch between the two sides of the identity
/// integral |grad_lambda u|^2 = integral u1, recomputed from the stored fields.
inline double energy_identity_check(const StokesCellSolution& sol) {
  const P2Space& sp = *sol.space;
  const double energy = p2_energy(sp, sol.lambda, sol.u1) + p2_energy(sp, sol.lambda, sol.u2);
  const double mean = p2_integral(sp, sol.u1);
  return std::abs(energy - mean) / std::max(energy, std::numeric_limits<double>::epsilon());
}

/// CSV rows "z1,z2,u1,u2,pi" over the P2 lattice, pressure interpolated linearly.
inline void write_stokes_fields(const StokesCellSolution& sol, std::ostream& os, int precision = 12) {
  const P2Space& sp = *sol.space;
  const auto p = p1_to_lattice(sp, sol.pi);
  os << "z1,z2,u1,u2,pi\n" << std::setprecision(precision);
  for (int I = 0; I < sp.lattice_z1(); ++I)
    for (int J = 0; J < sp.lattice_z2(); ++J) {
      const Point2 x = sp.node_position(I, J);
      const int id = sp.node(I, J);
      os << x.x << ',' << x.y << ',' << sol.u1[id] << ',' << sol.u2[id] << ',' << p[id] << '\n';
    }
}

}  // namespace roughfilm
