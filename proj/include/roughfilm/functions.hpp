/**
 * @file functions.hpp
 * @brief Scalar data functions f1(x1), g(x1) on (-1/2, 1/2) and the periodic flux profile G(z1).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "roughfilm/errors.hpp"
#include "roughfilm/geometry.hpp"

namespace roughfilm {

struct ConstantForm {
  double value = 0.0;
};

/// Piecewise-linear interpolation through (x, y) points sorted by x. Outside the
/// table the end values are held. Periodic functions wrap first and close the
/// table through the period.
struct TabulatedForm {
  std::vector<double> x;
  std::vector<double> y;
};

/// c[0] + c[1] x + c[2] x^2 + ...
struct PolynomialForm {
  std::vector<double> coefficients;
};

/// mean + amplitude cos(2 pi frequency x + phase)
struct CosineForm {
  double mean = 0.0;
  double amplitude = 0.0;
  double frequency = 1.0;
  double phase = 0.0;
};

using FunctionForm = std::variant<ConstantForm, TabulatedForm, PolynomialForm, CosineForm>;

class MacroFunction {
 public:
  MacroFunction() : form_(ConstantForm{}) {}
  explicit MacroFunction(FunctionForm form, bool periodic = false) : form_(std::move(form)), periodic_(periodic) {
    if (auto* t = std::get_if<TabulatedForm>(&form_)) {
      if (t->x.size() != t->y.size() || t->x.empty())
        throw Error(ErrorCode::ShapeMismatch, "tabulated function needs matching, non-empty x and y");
      for (std::size_t i = 1; i < t->x.size(); ++i)
        if (!(t->x[i] > t->x[i - 1])) throw Error(ErrorCode::ValidationError, "tabulated x must increase strictly");
      if (periodic_ && (t->x.front() < -0.5 || t->x.back() >= 0.5))
        throw Error(ErrorCode::ValidationError, "periodic table abscissae must lie in [-1/2, 1/2)");
    }
    if (auto* c = std::get_if<CosineForm>(&form_); c && periodic_ && c->frequency != std::round(c->frequency))
      throw Error(ErrorCode::ValidationError, "periodic cosine needs an integer frequency");
  }

  static MacroFunction constant(double v, bool periodic = false) { return MacroFunction(ConstantForm{v}, periodic); }

  const FunctionForm& form() const { return form_; }
  bool periodic() const { return periodic_; }

  double operator()(double x) const {
    if (periodic_) x = wrap_cell(x);
    return std::visit([&](const auto& f) { return eval(f, x); }, form_);
  }

  /// Kinks of the interpolant, used to split quadrature ranges.
  std::vector<double> breakpoints() const {
    const auto* t = std::get_if<TabulatedForm>(&form_);
    return t ? t->x : std::vector<double>{};
  }

  bool is_constant() const { return std::holds_alternative<ConstantForm>(form_); }

 private:
  static double eval(const ConstantForm& f, double) { return f.value; }

  static double eval(const PolynomialForm& f, double x) {
    double v = 0.0;
    for (auto it = f.coefficients.rbegin(); it != f.coefficients.rend(); ++it) v = v * x + *it;
    return v;
  }

  static double eval(const CosineForm& f, double x) {
    return f.mean + f.amplitude * std::cos(2.0 * std::numbers::pi * f.frequency * x + f.phase);
  }

  double eval(const TabulatedForm& t, double x) const {
    const auto& xs = t.x;
    const auto& ys = t.y;
    if (xs.size() == 1) return ys.front();
    if (periodic_ && (x < xs.front() || x >= xs.back())) {
      // Segment from the last sample to the first one shifted by a period.
      const double x0 = xs.back();
      const double x1 = xs.front() + 1.0;
      const double xx = x < xs.front() ? x + 1.0 : x;
      const double s = (xx - x0) / (x1 - x0);
      return ys.back() + s * (ys.front() - ys.back());
    }
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double s = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + s * (ys[i + 1] - ys[i]);
  }

  FunctionForm form_;
  bool periodic_ = false;
};

/// Uniform periodic table: sample i sits at z1 = -1/2 + i / n.
inline MacroFunction periodic_table(std::vector<double> values) {
  TabulatedForm t;
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) t.x.push_back(-0.5 + static_cast<double>(i) / static_cast<double>(n));
  t.y = std::move(values);
  return MacroFunction(std::move(t), true);
}

}  // namespace roughfilm
