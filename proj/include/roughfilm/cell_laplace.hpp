/**
 * @file cell_laplace.hpp
 * @brief Scalar cell problem -Delta_lambda w = 1 with w = 0 on both walls, and b_lambda.
 *
 * Uses the same P2 space and stiffness as the viscous block of the Stokes cell
 * problem, so the system is SPD and goes through sparse Cholesky.
 */
#pragma once

#include <algorithm>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "roughfilm/cell_stokes.hpp"
#include "roughfilm/errors.hpp"
#include "roughfilm/fem.hpp"
#include "roughfilm/sparse.hpp"

namespace roughfilm {

struct LaplaceCellSolution {
  std::shared_ptr<const P2Space> space;
  double lambda = 0.0;
  std::vector<double> w;  // P2 lattice values
  double b_lambda = 0.0;
  double energy = 0.0;  // integral of |grad_lambda w|^2
  double mean_w = 0.0;  // integral of w
  LinearSolveReport solve_report;
};

inline LaplaceCellSolution solve_laplace_cell(std::shared_ptr<const P2Space> space, double lambda,
                                              double tol = 1e-10, SolveOptions options = {}) {
  check_lambda(lambda);
  const P2Space& sp = *space;
  const DofMap dofs = DofMap::walls(sp, true);
  const int n = dofs.count;
  const std::vector<double> rhs = restrict_to_dofs(dofs, p2_load(sp));

  options.tol = tol;
  options.spd = true;
  LinearSolveResult result;
  try {
    result = solve(SparseMatrix::from_triplets(n, n, assemble_stiffness(sp, dofs, lambda)), rhs, options);
  } catch (const Error& err) {
    throw Error(ErrorCode::SolverFailure, std::string("Laplace cell solve: ") + err.what());
  }

  LaplaceCellSolution sol;
  sol.space = std::move(space);
  sol.lambda = lambda;
  sol.w = expand_from_dofs(dofs, result.solution);
  sol.energy = p2_energy(sp, lambda, sol.w);
  sol.b_lambda = sol.energy;
  sol.mean_w = p2_integral(sp, sol.w);
  sol.solve_report = std::move(result.report);
  if (!(sol.b_lambda > 0.0)) throw Error(ErrorCode::SolverFailure, "non-positive b_lambda");
  return sol;
}

inline LaplaceCellSolution solve_laplace_cell(const CellMesh& mesh, double lambda, double tol = 1e-10,
                                              SolveOptions options = {}) {
  return solve_laplace_cell(std::make_shared<const P2Space>(mesh), lambda, tol, options);
}

/// Relative mismatch in integral |grad_lambda w|^2 = integral w.
inline double energy_identity_check(const LaplaceCellSolution& sol) {
  const double energy = p2_energy(*sol.space, sol.lambda, sol.w);
  const double mean = p2_integral(*sol.space, sol.w);
  return std::abs(energy - mean) / std::max(energy, std::numeric_limits<double>::epsilon());
}

/// A Laplace cell solution whose w vanishes identically; drives a drift-free heat solve.
inline LaplaceCellSolution zero_laplace_field(std::shared_ptr<const P2Space> space, double lambda) {
  LaplaceCellSolution sol;
  sol.lambda = lambda;
  sol.w.assign(space->num_nodes(), 0.0);
  sol.space = std::move(space);
  return sol;
}

/// CSV rows "z1,z2,w" over the P2 lattice.
inline void write_laplace_fields(const LaplaceCellSolution& sol, std::ostream& os, int precision = 12) {
  const P2Space& sp = *sol.space;
  os << "z1,z2,w\n" << std::setprecision(precision);
  for (int I = 0; I < sp.lattice_z1(); ++I)
    for (int J = 0; J < sp.lattice_z2(); ++J) {
      const Point2 x = sp.node_position(I, J);
      os << x.x << ',' << x.y << ',' << sol.w[sp.node(I, J)] << '\n';
    }
}

}  // namespace roughfilm
