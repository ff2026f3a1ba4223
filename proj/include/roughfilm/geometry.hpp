/**
 * @file geometry.hpp
 * @brief Periodic roughness profile h(z1) and the terrain-following cell mesh.
 *
 * The reference cell is Z = Z' x (0, h(z1)) with Z' = (-1/2, 1/2). The mesh maps it
 * onto the unit square through zeta = z2 / h(z1), so every column i spans the
 * physical height h(z1_i). Column n1 wraps onto column 0.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "roughfilm/errors.hpp"

namespace roughfilm {

/// Maps any real onto the periodicity cell [-1/2, 1/2).
inline double wrap_cell(double z) { return z - std::floor(z + 0.5); }

/// amplitude * cos(2 pi order z + phase)
struct Harmonic {
  int order = 1;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct CosineSpec {
  double mean = 1.0;
  std::vector<Harmonic> harmonics;
};

/// Samples on the uniform periodic grid z_k = -1/2 + k/n, k = 0..n-1.
struct TabulatedSpec {
  std::vector<double> samples;
};

using ProfileSpec = std::variant<CosineSpec, TabulatedSpec>;

inline CosineSpec cosine_profile(double mean, double amplitude) {
  CosineSpec spec{mean, {}};
  if (amplitude != 0.0) spec.harmonics.push_back({1, amplitude, 0.0});
  return spec;
}

/// Periodic cubic spline through uniformly spaced samples.
class PeriodicSpline {
 public:
  PeriodicSpline() = default;

  explicit PeriodicSpline(std::vector<double> samples) : y_(std::move(samples)) {
    const std::size_t n = y_.size();
    spacing_ = 1.0 / static_cast<double>(n);
    // Cyclic system M[k-1] + 4 M[k] + M[k+1] = 6 (y[k+1] - 2 y[k] + y[k-1]) / d^2
    std::vector<double> rhs(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double prev = y_[(k + n - 1) % n];
      const double next = y_[(k + 1) % n];
      rhs[k] = 6.0 * (next - 2.0 * y_[k] + prev) / (spacing_ * spacing_);
    }
    second_ = solve_cyclic(rhs);
  }

  double value(double z) const {
    auto [k, s] = locate(z);
    const std::size_t n = y_.size();
    const std::size_t k1 = (k + 1) % n;
    const double t = 1.0 - s;
    return t * y_[k] + s * y_[k1] +
           spacing_ * spacing_ / 6.0 * ((t * t * t - t) * second_[k] + (s * s * s - s) * second_[k1]);
  }

  double derivative(double z) const {
    auto [k, s] = locate(z);
    const std::size_t n = y_.size();
    const std::size_t k1 = (k + 1) % n;
    const double t = 1.0 - s;
    return (y_[k1] - y_[k]) / spacing_ +
           spacing_ / 6.0 * (-(3.0 * t * t - 1.0) * second_[k] + (3.0 * s * s - 1.0) * second_[k1]);
  }

  std::vector<double> knots() const {
    std::vector<double> out(y_.size() + 1);
    for (std::size_t k = 0; k <= y_.size(); ++k) out[k] = -0.5 + static_cast<double>(k) * spacing_;
    return out;
  }

  const std::vector<double>& samples() const { return y_; }

 private:
  std::pair<std::size_t, double> locate(double z) const {
    const double u = (wrap_cell(z) + 0.5) / spacing_;
    auto k = static_cast<std::size_t>(std::floor(u));
    if (k >= y_.size()) k = y_.size() - 1;
    return {k, u - static_cast<double>(k)};
  }

  // Sherman-Morrison reduction of the cyclic tridiagonal (1, 4, 1) system.
  std::vector<double> solve_cyclic(const std::vector<double>& rhs) const {
    const std::size_t n = rhs.size();
    const double alpha = 1.0, beta = 1.0, gamma = -4.0;
    std::vector<double> diag(n, 4.0);
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;
    auto thomas = [&](std::vector<double> d) {
      std::vector<double> b = diag;
      for (std::size_t i = 1; i < n; ++i) {
        const double m = 1.0 / b[i - 1];
        b[i] -= m;
        d[i] -= m * d[i - 1];
      }
      std::vector<double> x(n);
      x[n - 1] = d[n - 1] / b[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - x[i + 1]) / b[i];
      return x;
    };
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    const auto x = thomas(rhs);
    const auto z = thomas(u);
    const double factor = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - factor * z[i];
    return out;
  }

  std::vector<double> y_;
  std::vector<double> second_;
  double spacing_ = 1.0;
};

/// Z'-periodic upper-wall gap h(z1) with cached extrema.
class RoughnessProfile {
 public:
  enum class Kind { AnalyticCosine, Tabulated };

  static RoughnessProfile make(const ProfileSpec& spec) {
    RoughnessProfile p;
    p.spec_ = spec;
    if (const auto* cos = std::get_if<CosineSpec>(&spec)) {
      double amp = 0.0;
      for (const auto& hm : cos->harmonics) {
        if (hm.order < 1)
          throw Error(ErrorCode::NonPositiveGap, "harmonic order must be >= 1");
        amp += std::abs(hm.amplitude);
      }
      if (!std::isfinite(cos->mean) || !std::isfinite(amp) || cos->mean - amp <= 0.0)
        throw Error(ErrorCode::NonPositiveGap,
                    "mean " + std::to_string(cos->mean) + " must exceed the summed amplitudes " +
                        std::to_string(amp));
      p.kind_ = Kind::AnalyticCosine;
    } else {
      const auto& tab = std::get<TabulatedSpec>(spec);
      if (tab.samples.size() < 8)
        throw Error(ErrorCode::TooFewSamples,
                    "tabulated profile needs at least 8 samples, got " + std::to_string(tab.samples.size()));
      for (double v : tab.samples)
        if (!(v > 0.0) || !std::isfinite(v))
          throw Error(ErrorCode::NonPositiveGap, "tabulated samples must be strictly positive");
      p.kind_ = Kind::Tabulated;
      p.spline_ = PeriodicSpline(tab.samples);
    }
    p.locate_extrema();
    if (!(p.h_min_ > 0.0))
      throw Error(ErrorCode::NonPositiveGap, "interpolated gap reaches " + std::to_string(p.h_min_));
    return p;
  }

  Kind kind() const { return kind_; }
  const ProfileSpec& spec() const { return spec_; }

  double h(double z1) const { return raw_h(z1 - shift_); }
  double dh(double z1) const { return raw_dh(z1 - shift_); }
  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }
  double shift() const { return shift_; }

  /// Profile translated along the period: returns z1 -> h(z1 - s).
  RoughnessProfile shifted(double s) const {
    RoughnessProfile p = *this;
    p.shift_ = shift_ + s;
    return p;
  }

  /// Points in [-1/2, 1/2] where h is only piecewise smooth (spline knots).
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    if (kind_ != Kind::Tabulated) return out;
    for (double k : spline_.knots()) out.push_back(wrap_cell(k + shift_));
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  double raw_h(double z) const {
    if (kind_ == Kind::Tabulated) return spline_.value(z);
    const auto& cos = std::get<CosineSpec>(spec_);
    double v = cos.mean;
    for (const auto& hm : cos.harmonics)
      v += hm.amplitude * std::cos(2.0 * std::numbers::pi * hm.order * z + hm.phase);
    return v;
  }

  double raw_dh(double z) const {
    if (kind_ == Kind::Tabulated) return spline_.derivative(z);
    const auto& cos = std::get<CosineSpec>(spec_);
    double v = 0.0;
    for (const auto& hm : cos.harmonics) {
      const double w = 2.0 * std::numbers::pi * hm.order;
      v -= hm.amplitude * w * std::sin(w * z + hm.phase);
    }
    return v;
  }

  // Dense sampling followed by Brent refinement around the best samples.
  void locate_extrema() {
    std::size_t samples = 4096;
    if (kind_ == Kind::Tabulated) samples = std::max<std::size_t>(samples, 16 * spline_.samples().size());
    const double step = 1.0 / static_cast<double>(samples);
    std::size_t imin = 0, imax = 0;
    double vmin = raw_h(-0.5), vmax = vmin;
    for (std::size_t i = 1; i < samples; ++i) {
      const double v = raw_h(-0.5 + static_cast<double>(i) * step);
      if (v < vmin) { vmin = v; imin = i; }
      if (v > vmax) { vmax = v; imax = i; }
    }
    auto refine = [&](std::size_t i, double sign) {
      const double c = -0.5 + static_cast<double>(i) * step;
      auto f = [&](double z) { return sign * raw_h(z); };
      auto r = boost::math::tools::brent_find_minima(f, c - step, c + step, 52);
      return sign * r.second;
    };
    h_min_ = std::min(vmin, refine(imin, 1.0));
    h_max_ = std::max(vmax, refine(imax, -1.0));
  }

  Kind kind_ = Kind::AnalyticCosine;
  ProfileSpec spec_;
  PeriodicSpline spline_;
  double h_min_ = 0.0;
  double h_max_ = 0.0;
  double shift_ = 0.0;
};

inline RoughnessProfile make_profile(const ProfileSpec& spec) { return RoughnessProfile::make(spec); }

/// Scalar values on the mesh vertices, column-major in z1: value(i, j) with
/// i in [0, n1) periodic and j in [0, n2].
struct GridField {
  int n1 = 0;
  int n2 = 0;
  std::vector<double> values;

  GridField() = default;
  GridField(int n1_, int n2_, double fill = 0.0)
      : n1(n1_), n2(n2_), values(static_cast<std::size_t>(n1_) * (n2_ + 1), fill) {}

  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * (n2 + 1) + j]; }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * (n2 + 1) + j]; }
};

/// Structured terrain-following discretization of Z.
class CellMesh {
 public:
  CellMesh(RoughnessProfile profile, int n1, int n2) : profile_(std::move(profile)), n1_(n1), n2_(n2) {
    if (n1 < 4 || n2 < 4 || n1 % 2 != 0 || n2 % 2 != 0)
      throw Error(ErrorCode::BadResolution, "n1 and n2 must be even and >= 4 (got " +
                                                std::to_string(n1) + ", " + std::to_string(n2) + ")");
    h_.resize(n1_);
    dh_.resize(n1_);
    for (int i = 0; i < n1_; ++i) {
      h_[i] = profile_.h(z1(i));
      dh_[i] = profile_.dh(z1(i));
    }
  }

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double dz1() const { return 1.0 / n1_; }
  double dzeta() const { return 1.0 / n2_; }
  const RoughnessProfile& profile() const { return profile_; }

  /// Unwrapped column abscissa; i == n1 gives the right edge +1/2.
  double z1(int i) const { return -0.5 + static_cast<double>(i) / n1_; }
  double zeta(int j) const { return static_cast<double>(j) / n2_; }
  int wrap(int i) const { return ((i % n1_) + n1_) % n1_; }

  double h(int i) const { return h_[wrap(i)]; }
  double dh(int i) const { return dh_[wrap(i)]; }
  double z2(int i, int j) const { return zeta(j) * h(i); }

  /// Area of the trapezoidal cell between columns i, i+1 and levels j, j+1.
  double cell_area(int i, int j) const {
    (void)j;
    return dz1() * dzeta() * 0.5 * (h(i) + h(i + 1));
  }

  double total_area() const {
    double sum = 0.0;
    for (int i = 0; i < n1_; ++i)
      for (int j = 0; j < n2_; ++j) sum += cell_area(i, j);
    return sum;
  }

 private:
  RoughnessProfile profile_;
  int n1_;
  int n2_;
  std::vector<double> h_;
  std::vector<double> dh_;
};

inline CellMesh build_mesh(const RoughnessProfile& profile, int n1, int n2) {
  return CellMesh(profile, n1, n2);
}

/// Samples f(z1, z2) on the mesh vertices.
inline GridField sample_grid(const CellMesh& mesh, const std::function<double(double, double)>& f) {
  GridField out(mesh.n1(), mesh.n2());
  for (int i = 0; i < mesh.n1(); ++i)
    for (int j = 0; j <= mesh.n2(); ++j) out(i, j) = f(mesh.z1(i), mesh.z2(i, j));
  return out;
}

/// Physical-domain integral of a vertex field: trapezoid in zeta, periodic
/// trapezoid in z1, Jacobian h(z1) of the terrain-following map.
inline double cell_quadrature(const CellMesh& mesh, const GridField& field) {
  if (field.n1 != mesh.n1() || field.n2 != mesh.n2() ||
      field.values.size() != static_cast<std::size_t>(mesh.n1()) * (mesh.n2() + 1))
    throw Error(ErrorCode::ShapeMismatch, "field shape does not match the mesh");
  double total = 0.0;
  for (int i = 0; i < mesh.n1(); ++i) {
    double column = 0.5 * (field(i, 0) + field(i, mesh.n2()));
    for (int j = 1; j < mesh.n2(); ++j) column += field(i, j);
    total += column * mesh.h(i);
  }
  return total * mesh.dz1() * mesh.dzeta();
}

}  // namespace roughfilm
