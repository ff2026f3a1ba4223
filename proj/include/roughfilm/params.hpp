/**
 * @file params.hpp
 * @brief Dimensionless fluid parameters and macroscopic forcing data.
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "roughfilm/functions.hpp"

namespace roughfilm {

struct FluidParams {
  double N = 0.5;   // coupling parameter, 0 < N < 1
  double Pr = 1.0;  // > 0
  double L = 1.0;   // > 0
  double D = 0.0;   // >= 0
  double M = 0.0;   // accepted, absent from the limit models
  double Ra = 0.0;  // accepted, absent from the limit models
  double k = 0.0;   // Nusselt scale, >= 0
  double q_left = 0.0;
  double q_right = 0.0;

  /// Every violated invariant, phrased for a user.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    auto finite = [&](double v, const char* name) {
      if (!std::isfinite(v)) out.push_back(std::string(name) + " must be finite");
      return std::isfinite(v);
    };
    if (finite(N, "N") && !(N > 0.0 && N < 1.0)) out.push_back("N must lie in (0,1)");
    if (finite(Pr, "Pr") && !(Pr > 0.0)) out.push_back("Pr must be positive");
    if (finite(L, "L") && !(L > 0.0)) out.push_back("L must be positive");
    if (finite(D, "D") && D < 0.0) out.push_back("D must be non-negative");
    if (finite(M, "M") && M < 0.0) out.push_back("M must be non-negative");
    finite(Ra, "Ra");
    if (finite(k, "k") && k < 0.0) out.push_back("k must be non-negative");
    finite(q_left, "q_left");
    finite(q_right, "q_right");
    return out;
  }

  void validate() const {
    auto v = violations();
    if (!v.empty()) throw ValidationError(std::move(v));
  }
};

struct ForcingData {
  MacroFunction f1;  // on (-1/2, 1/2)
  MacroFunction g;   // on (-1/2, 1/2)
  MacroFunction G = MacroFunction::constant(0.0, true);  // periodic on Z'
};

}  // namespace roughfilm
