/**
 * @file subcritical.hpp
 * @brief Closed-form coefficients and cell fields of the subcritical regime (lambda = 0).
 *
 *   pi'(z1) = 1 - h^3 / I3,                I3 = integral of h^3 over Z'
 *   a0 = (1/12) integral h^3 (2 - h^3 / I3) = (1/12)(2 I3 - I6 / I3)
 *   b0 = I3 / 12,   c0 = (1/2) integral h^2 G
 */
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "roughfilm/errors.hpp"
#include "roughfilm/functions.hpp"
#include "roughfilm/geometry.hpp"
#include "roughfilm/quadrature.hpp"

namespace roughfilm {

inline constexpr double kSubcriticalQuadTol = 1e-12;

namespace detail {

template <class F>
double cell_integral(const RoughnessProfile& profile, F&& f, std::vector<double> extra_breaks = {}) {
  auto breaks = profile.breakpoints();
  breaks.insert(breaks.end(), extra_breaks.begin(), extra_breaks.end());
  return integrate(std::forward<F>(f), -0.5, 0.5, kSubcriticalQuadTol, breaks);
}

}  // namespace detail

/// pi'(z1) = 1 - h^3 / I3 together with the integral it was normalized by.
struct PiPrime {
  RoughnessProfile profile;
  double int_h3 = 0.0;
  double mean = 0.0;  // integral of pi' over Z', zero up to quadrature error

  double operator()(double z1) const { return 1.0 - std::pow(profile.h(z1), 3) / int_h3; }
  /// Closed-form derivative -3 h^2 h' / I3.
  double second(double z1) const {
    const double h = profile.h(z1);
    return -3.0 * h * h * profile.dh(z1) / int_h3;
  }
};

inline PiPrime compute_pi_prime(const RoughnessProfile& profile) {
  PiPrime p{profile, 0.0, 0.0};
  p.int_h3 = detail::cell_integral(profile, [&](double z) { return std::pow(profile.h(z), 3); });
  p.mean = detail::cell_integral(profile, [&](double z) { return p(z); });
  if (!(std::abs(p.mean) <= 1e-10))
    throw Error(ErrorCode::QuadratureFailure, "pi' mean " + std::to_string(p.mean) + " is not zero");
  return p;
}

/// Max over n uniform points of |h^3 pi'' - 3 h^2 h' pi' + 3 h^2 h'|.
inline double pi_ode_residual(const PiPrime& p, int n = 1000) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = -0.5 + (i + 0.5) / n;
    const double h = p.profile.h(z), dh = p.profile.dh(z);
    const double r = h * h * h * p.second(z) - 3.0 * h * h * dh * p(z) + 3.0 * h * h * dh;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

struct SubcriticalCoefficients {
  double a0 = 0.0;
  double b0 = 0.0;
  double c0 = 0.0;
  double int_h3 = 0.0;
  double int_h6 = 0.0;
  double int_h2G = 0.0;
  /// (1/12) (integral h^-3)^-1, the coefficient a conservative Reynolds closure
  /// would give; reported for comparison only.
  double harmonic_mean_a = 0.0;
  std::vector<Warning> warnings;
};

inline double compute_b0(const RoughnessProfile& profile) {
  return detail::cell_integral(profile, [&](double z) { return std::pow(profile.h(z), 3); }) / 12.0;
}

inline double compute_a0(const RoughnessProfile& profile, std::vector<Warning>* warnings = nullptr) {
  const double i3 = detail::cell_integral(profile, [&](double z) { return std::pow(profile.h(z), 3); });
  const double a0 = detail::cell_integral(profile, [&](double z) {
                      const double h3 = std::pow(profile.h(z), 3);
                      return h3 * (2.0 - h3 / i3);
                    }) / 12.0;
  if (!(a0 > 0.0) && warnings)
    warnings->push_back({"NonPositiveA0", "a0 = " + std::to_string(a0) + " is not positive"});
  return a0;
}

inline double compute_c0(const RoughnessProfile& profile, const MacroFunction& G) {
  return 0.5 * detail::cell_integral(
                   profile, [&](double z) { return std::pow(profile.h(z), 2) * G(z); }, G.breakpoints());
}

inline SubcriticalCoefficients subcritical_coefficients(const RoughnessProfile& profile, const MacroFunction& G) {
  SubcriticalCoefficients c;
  c.int_h3 = detail::cell_integral(profile, [&](double z) { return std::pow(profile.h(z), 3); });
  c.int_h6 = detail::cell_integral(profile, [&](double z) { return std::pow(profile.h(z), 6); });
  c.int_h2G = 2.0 * compute_c0(profile, G);
  c.a0 = compute_a0(profile, &c.warnings);
  c.b0 = c.int_h3 / 12.0;
  c.c0 = 0.5 * c.int_h2G;
  c.harmonic_mean_a = 1.0 / (12.0 * detail::cell_integral(profile, [&](double z) { return std::pow(profile.h(z), -3); }));
  return c;
}

struct SubcriticalFields {
  double u_bl = 0.0;
  double w_bl = 0.0;
  double T_hat = 0.0;
};

/// Pointwise closed-form cell fields at (z1, z2), 0 <= z2 <= h(z1).
inline SubcriticalFields subcritical_cell_fields(const PiPrime& pi_prime, double k, const MacroFunction& G, double z1,
                                                 double z2) {
  const double h = pi_prime.profile.h(z1);
  const double slack = 1e-14 * h;
  if (!(z2 >= -slack && z2 <= h + slack))
    throw Error(ErrorCode::OutOfDomain, "z2 = " + std::to_string(z2) + " outside (0, h(z1)) at z1 = " + std::to_string(z1));
  const double q = z2 * z2 - h * z2;
  return {0.5 * (1.0 + pi_prime(z1)) * q, -0.5 * q, k * G(z1) * z2};
}

}  // namespace roughfilm
