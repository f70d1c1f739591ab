#pragma once

#include "lgtsim/numkit.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lgtsim {

using ResidualFn = std::function<RVector(const RVector& x)>;

struct LsqOptions {
  int max_iterations = 200;
  double ftol = 1e-12;      // relative cost decrease
  double xtol = 1e-10;      // relative step in scaled variables
  double gtol = 1e-12;      // scaled gradient infinity norm
  double fd_step = 1e-6;    // forward-difference step in scaled variables
  double lambda0 = 1e-3;
};

struct LsqResult {
  RVector x;
  RVector residuals;
  double cost = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<bool> at_bound;
  std::string message;
  RMatrix jacobian;  // at the solution, in unscaled variables
};

// Bounded Levenberg-Marquardt with a forward-difference Jacobian.
// scale gives the typical magnitude of each parameter; the solver works on x / scale.
LsqResult levenberg_marquardt(const ResidualFn& f, const RVector& x0, const RVector& lower,
                              const RVector& upper, const RVector& scale, const LsqOptions& opts = {});

// Ordinary linear least squares y ≈ A c with complex data, solved through QR.
CVector complex_linear_lsq(const CMatrix& a, const CVector& y);

struct ParabolaVertex {
  double x;
  double y;
  bool interior;  // false when the maximum sits at the end of the grid
};

// Vertex through the largest sample and its neighbours.
ParabolaVertex parabolic_peak(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lgtsim
