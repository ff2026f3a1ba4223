/**
 * @file sparse.hpp
 * @brief Row-compressed sparse matrices and the linear solve path shared by the cell solvers.
 *
 * Direct solves use KLU when it was found at configure time and
 * Eigen::SparseLU (COLAMD ordering, threshold partial pivoting) otherwise or
 * when KLU misses the tolerance, followed by a few steps of iterative refinement. The iterative path
 * is right-preconditioned restarted GMRES with an incomplete-LU preconditioner,
 * so the true residual never grows across restarts.
 *
 * Stokes-type saddle-point systems whose velocity block is one SPD matrix per
 * component go through solve_saddle_point: a sparse Cholesky factorization of
 * that block and preconditioned conjugate gradients on the pressure Schur
 * complement.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#ifdef ROUGHFILM_HAVE_KLU
#include <Eigen/KLUSupport>
#endif

#include "roughfilm/errors.hpp"

namespace roughfilm {

struct Triplet {
  int row;
  int col;
  double value;
};

/// CSR storage with sorted, unique column indices in every row.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_offsets{0};
  std::vector<int> col_indices;
  std::vector<double> values;

  std::size_t nonzeros() const { return values.size(); }

  /// Duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries) {
    for (const auto& t : entries)
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
        throw Error(ErrorCode::ShapeMismatch, "triplet index out of bounds");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_offsets.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
      const auto& t = entries[k];
      double sum = 0.0;
      std::size_t e = k;
      while (e < entries.size() && entries[e].row == t.row && entries[e].col == t.col) sum += entries[e++].value;
      m.col_indices.push_back(t.col);
      m.values.push_back(sum);
      m.row_offsets[t.row + 1]++;
      k = e;
    }
    for (int r = 0; r < rows; ++r) m.row_offsets[r + 1] += m.row_offsets[r];
    return m;
  }

  static SparseMatrix identity(int n) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  std::vector<double> multiply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != cols) throw Error(ErrorCode::ShapeMismatch, "vector length mismatch");
    std::vector<double> y(rows, 0.0);
    for (int r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) acc += values[k] * x[col_indices[k]];
      y[r] = acc;
    }
    return y;
  }

  double at(int r, int c) const {
    const auto first = col_indices.begin() + row_offsets[r];
    const auto last = col_indices.begin() + row_offsets[r + 1];
    const auto it = std::lower_bound(first, last, c);
    return (it != last && *it == c) ? values[it - col_indices.begin()] : 0.0;
  }

  Eigen::SparseMatrix<double> to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values.size());
    for (int r = 0; r < rows; ++r)
      for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) t.emplace_back(r, col_indices[k], values[k]);
    Eigen::SparseMatrix<double> out(rows, cols);
    out.setFromTriplets(t.begin(), t.end());
    out.makeCompressed();
    return out;
  }
};

/// Accumulates entries during finite element assembly.
class TripletBuilder {
 public:
  TripletBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}
  void add(int r, int c, double v) {
    if (v != 0.0) entries_.push_back({r, c, v});
  }
  void reserve(std::size_t n) { entries_.reserve(n); }
  SparseMatrix build() { return SparseMatrix::from_triplets(rows_, cols_, std::move(entries_)); }

 private:
  int rows_;
  int cols_;
  std::vector<Triplet> entries_;
};

enum class SolveMethod { Auto, Direct, Iterative, Schur };

inline const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Direct: return "direct";
    case SolveMethod::Iterative: return "iterative";
    case SolveMethod::Schur: return "schur";
    default: return "auto";
  }
}

struct SolveOptions {
  SolveMethod method = SolveMethod::Auto;
  double tol = 1e-10;
  /// Auto switches to the iterative path above this many unknowns.
  int max_direct_unknowns = 200000;
  int restart = 60;
  int max_iterations = 20000;
  int refinement_steps = 3;
  /// Declares the matrix symmetric positive definite; the direct path then
  /// uses a sparse Cholesky factorization instead of LU.
  bool spd = false;
};

struct LinearSolveReport {
  SolveMethod method = SolveMethod::Direct;
  int iterations = 0;
  double residual = 0.0;
  double wall_seconds = 0.0;
  /// Relative residual after every GMRES cycle, or every pressure iteration of
  /// the Schur path.
  std::vector<double> restart_residuals;
};

struct LinearSolveResult {
  std::vector<double> solution;
  LinearSolveReport report;
};

namespace detail {

inline double relative_residual(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& b) {
  return (a * x - b).norm() / std::max(1.0, b.norm());
}

template <class Factor>
Eigen::VectorXd refine(const Factor& lu, const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                       const SolveOptions& opt, LinearSolveReport& report) {
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw Error(ErrorCode::SingularSystem, "sparse LU produced no finite solution");
  double res = relative_residual(a, x, b);
  for (int step = 0; step < opt.refinement_steps && res > 0.01 * opt.tol; ++step) {
    const Eigen::VectorXd next_x = x + lu.solve(b - a * x);
    const double next = relative_residual(a, next_x, b);
    ++report.iterations;
    if (!(next < res)) break;
    x = next_x;
    res = next;
  }
  report.residual = res;
  return x;
}

inline Eigen::VectorXd direct_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                                    const SolveOptions& opt, LinearSolveReport& report) {
  if (opt.spd) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(a);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::SingularSystem, "sparse Cholesky factorization broke down");
    return refine(llt, a, b, opt, report);
  }
#ifdef ROUGHFILM_HAVE_KLU
  // KLU pivots only within its fill-reducing order and can lose accuracy on
  // indefinite systems; those fall through to SparseLU.
  {
    Eigen::KLU<Eigen::SparseMatrix<double>> klu;
    klu.compute(a);
    if (klu.info() == Eigen::Success) {
      try {
        LinearSolveReport trial = report;
        Eigen::VectorXd x = refine(klu, a, b, opt, trial);
        if (trial.residual <= opt.tol) {
          report = trial;
          return x;
        }
      } catch (const Error&) {
      }
    }
  }
#endif
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw Error(ErrorCode::SingularSystem, "sparse LU factorization broke down: " + lu.lastErrorMessage());
  return refine(lu, a, b, opt, report);
}

inline Eigen::VectorXd gmres_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                                   const SolveOptions& opt, LinearSolveReport& report) {
  Eigen::IncompleteLUT<double> ilu;
  ilu.setDroptol(1e-4);
  ilu.setFillfactor(10);
  ilu.compute(a);
  if (ilu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "incomplete LU breakdown");

  const Eigen::Index n = b.size();
  const int m = std::max(1, opt.restart);
  const double bnorm = std::max(1.0, b.norm());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  double res = r.norm() / bnorm;
  report.restart_residuals.push_back(res);

  while (res > opt.tol && report.iterations < opt.max_iterations) {
    const double beta = r.norm();
    Eigen::MatrixXd v(n, m + 1);
    Eigen::MatrixXd z(n, m);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    g(0) = beta;
    v.col(0) = r / beta;
    int k = 0;
    for (; k < m && report.iterations < opt.max_iterations; ++k) {
      z.col(k) = ilu.solve(v.col(k));
      Eigen::VectorXd w = a * z.col(k);
      for (int i = 0; i <= k; ++i) {
        hess(i, k) = w.dot(v.col(i));
        w -= hess(i, k) * v.col(i);
      }
      hess(k + 1, k) = w.norm();
      if (hess(k + 1, k) > 0.0) v.col(k + 1) = w / hess(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double t = cs(i) * hess(i, k) + sn(i) * hess(i + 1, k);
        hess(i + 1, k) = -sn(i) * hess(i, k) + cs(i) * hess(i + 1, k);
        hess(i, k) = t;
      }
      const double denom = std::hypot(hess(k, k), hess(k + 1, k));
      if (denom == 0.0) break;
      cs(k) = hess(k, k) / denom;
      sn(k) = hess(k + 1, k) / denom;
      hess(k, k) = denom;
      hess(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      ++report.iterations;
      if (std::abs(g(k + 1)) / bnorm <= opt.tol) {
        ++k;
        break;
      }
    }
    if (k == 0) throw Error(ErrorCode::SingularSystem, "GMRES breakdown");
    const Eigen::VectorXd y =
        hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    x += z.leftCols(k) * y;
    r = b - a * x;
    const double next = r.norm() / bnorm;
    if (!std::isfinite(next)) throw Error(ErrorCode::NonFinite, "GMRES produced a non-finite residual");
    report.restart_residuals.push_back(next);
    if (next > opt.tol && next > res * (1.0 - 1e-10))
      throw Error(ErrorCode::SingularSystem, "GMRES stagnated at residual " + std::to_string(next));
    res = next;
  }
  if (res > opt.tol)
    throw Error(ErrorCode::SingularSystem, "GMRES hit the iteration limit at residual " + std::to_string(res));
  report.residual = res;
  return x;
}

}  // namespace detail

/// Solves A x = b. The result satisfies |Ax - b| / max(1, |b|) <= opt.tol or throws.
inline LinearSolveResult solve(const SparseMatrix& matrix, std::span<const double> rhs,
                               const SolveOptions& opt = {}) {
  if (matrix.rows != matrix.cols) throw Error(ErrorCode::ShapeMismatch, "matrix is not square");
  if (static_cast<int>(rhs.size()) != matrix.rows) throw Error(ErrorCode::ShapeMismatch, "rhs length mismatch");
  for (double v : matrix.values)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "matrix holds a non-finite entry");
  for (double v : rhs)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "rhs holds a non-finite entry");

  const auto start = std::chrono::steady_clock::now();
  LinearSolveResult out;
  SolveMethod method = opt.method;
  if (method == SolveMethod::Auto)
    method = matrix.rows <= opt.max_direct_unknowns ? SolveMethod::Direct : SolveMethod::Iterative;
  out.report.method = method;

  const Eigen::SparseMatrix<double> a = matrix.to_eigen();
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  Eigen::VectorXd x = method == SolveMethod::Direct ? detail::direct_solve(a, b, opt, out.report)
                                                    : detail::gmres_solve(a, b, opt, out.report);
  if (!x.allFinite()) throw Error(ErrorCode::NonFinite, "solution holds a non-finite entry");
  if (out.report.residual > opt.tol)
    throw Error(ErrorCode::SingularSystem,
                "residual " + std::to_string(out.report.residual) + " above tolerance");
  out.solution.assign(x.data(), x.data() + x.size());
  out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Block system  [K 0 .. B_1^T; 0 K .. B_2^T; ...; B_1 B_2 .. 0] [u; p] = [f; 0]
/// with one SPD block K shared by every component. The pressure is determined
/// up to the kernel of B^T (constants for a periodic cell), fixed here by
/// sum_k m_k p_k = 0 with m the row sums of pressure_mass.
struct SaddlePointSystem {
  SparseMatrix stiffness;
  std::vector<SparseMatrix> divergence;
  SparseMatrix pressure_mass;
  std::vector<std::vector<double>> loads;
};

struct SaddlePointSolution {
  std::vector<std::vector<double>> velocity;
  std::vector<double> pressure;
  /// max_k |(B u)_k| / m_k, the mass-weighted divergence defect.
  double divergence_defect = 0.0;
  LinearSolveReport report;
};

inline SaddlePointSolution solve_saddle_point(const SaddlePointSystem& sys, const SolveOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const int nv = sys.stiffness.rows;
  const int np = sys.pressure_mass.rows;
  const std::size_t dim = sys.divergence.size();
  if (sys.stiffness.cols != nv || sys.pressure_mass.cols != np || sys.loads.size() != dim || dim == 0)
    throw Error(ErrorCode::ShapeMismatch, "saddle-point blocks have inconsistent shapes");
  for (std::size_t c = 0; c < dim; ++c)
    if (sys.divergence[c].rows != np || sys.divergence[c].cols != nv ||
        static_cast<int>(sys.loads[c].size()) != nv)
      throw Error(ErrorCode::ShapeMismatch, "saddle-point blocks have inconsistent shapes");

  using SpMat = Eigen::SparseMatrix<double>;
  const SpMat k = sys.stiffness.to_eigen();
  const SpMat mass = sys.pressure_mass.to_eigen();
  std::vector<SpMat> b;
  std::vector<Eigen::VectorXd> f;
  for (std::size_t c = 0; c < dim; ++c) {
    b.push_back(sys.divergence[c].to_eigen());
    f.push_back(Eigen::Map<const Eigen::VectorXd>(sys.loads[c].data(), nv));
    if (!f.back().allFinite()) throw Error(ErrorCode::NonFinite, "load holds a non-finite entry");
  }
  for (double v : sys.stiffness.values)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "matrix holds a non-finite entry");

  Eigen::SimplicialLLT<SpMat> kf(k);
  if (kf.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "Cholesky factorization of the velocity block failed");
  Eigen::SimplicialLLT<SpMat> mf(mass);
  if (mf.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "Cholesky factorization of the pressure mass failed");
  const Eigen::VectorXd weights = mass * Eigen::VectorXd::Ones(np);

  auto velocity = [&](const Eigen::VectorXd& p) {
    std::vector<Eigen::VectorXd> u(dim);
    for (std::size_t c = 0; c < dim; ++c) u[c] = kf.solve(f[c] - b[c].transpose() * p);
    return u;
  };
  auto divergence = [&](const std::vector<Eigen::VectorXd>& u) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(np);
    for (std::size_t c = 0; c < dim; ++c) d += b[c] * u[c];
    return d;
  };
  auto defect = [&](const Eigen::VectorXd& r) { return r.cwiseAbs().cwiseQuotient(weights).maxCoeff(); };

  SaddlePointSolution out;
  out.report.method = SolveMethod::Schur;
  // Residual of the pressure equation S p = B K^-1 f is B u(p); conjugate
  // gradients on the range of S, preconditioned by the pressure mass matrix.
  Eigen::VectorXd p = Eigen::VectorXd::Zero(np);
  Eigen::VectorXd r = divergence(velocity(p));
  const double target = 0.01 * opt.tol;
  double res = defect(r);
  out.report.restart_residuals.push_back(res);
  Eigen::VectorXd z = mf.solve(r);
  Eigen::VectorXd d = z;
  double rz = r.dot(z);
  double best = res;
  int since_best = 0;
  while (res > target && out.report.iterations < opt.max_iterations && since_best < 50) {
    std::vector<Eigen::VectorXd> kd(dim);
    for (std::size_t c = 0; c < dim; ++c) kd[c] = kf.solve(b[c].transpose() * d);
    const Eigen::VectorXd q = divergence(kd);
    const double dq = d.dot(q);
    if (!(dq > 0.0)) break;
    const double alpha = rz / dq;
    p += alpha * d;
    r -= alpha * q;
    ++out.report.iterations;
    if (out.report.iterations % 50 == 0) r = divergence(velocity(p));
    const double next = defect(r);
    if (!std::isfinite(next)) throw Error(ErrorCode::NonFinite, "pressure iteration produced a non-finite residual");
    out.report.restart_residuals.push_back(next);
    res = next;
    if (res < best) {
      best = res;
      since_best = 0;
    } else {
      ++since_best;
    }
    z = mf.solve(r);
    const double rz_next = r.dot(z);
    d = z + (rz_next / rz) * d;
    rz = rz_next;
  }
  p -= (weights.dot(p) / weights.sum()) * Eigen::VectorXd::Ones(np);
  const auto u = velocity(p);
  const Eigen::VectorXd div = divergence(u);
  out.divergence_defect = defect(div);

  // Residual of the full block system, scaled as in solve().
  double num = div.squaredNorm();
  double rhs = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    num += (k * u[c] + b[c].transpose() * p - f[c]).squaredNorm();
    rhs += f[c].squaredNorm();
  }
  out.report.residual = std::sqrt(num) / std::max(1.0, std::sqrt(rhs));
  if (!(out.report.residual <= opt.tol) || !(out.divergence_defect <= opt.tol))
    throw Error(ErrorCode::SingularSystem, "pressure iteration stopped at divergence defect " +
                                               std::to_string(out.divergence_defect));
  for (std::size_t c = 0; c < dim; ++c) out.velocity.emplace_back(u[c].data(), u[c].data() + nv);
  out.pressure.assign(p.data(), p.data() + np);
  out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace roughfilm
