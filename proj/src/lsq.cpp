#include "lgtsim/lsq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lgtsim {

LsqResult levenberg_marquardt(const ResidualFn& f, const RVector& x0, const RVector& lower,
                              const RVector& upper, const RVector& scale, const LsqOptions& opts) {
  const Index n = x0.size();
  if (lower.size() != n || upper.size() != n || scale.size() != n) {
    throw std::invalid_argument("levenberg_marquardt: dimension mismatch");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i]) || !(scale[i] > 0.0)) {
      throw std::invalid_argument("levenberg_marquardt: invalid bounds or scale");
    }
  }
  const RVector lo = lower.cwiseQuotient(scale);
  const RVector hi = upper.cwiseQuotient(scale);
  auto clamp = [&](RVector z) {
    for (Index i = 0; i < n; ++i) z[i] = std::clamp(z[i], lo[i], hi[i]);
    return z;
  };

  LsqResult res;
  auto eval = [&](const RVector& z) {
    ++res.evaluations;
    return f(z.cwiseProduct(scale));
  };

  RVector z = clamp(x0.cwiseQuotient(scale));
  RVector r = eval(z);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) throw std::runtime_error("levenberg_marquardt: non-finite initial residual");
  double lambda = opts.lambda0;
  RMatrix jac(r.size(), n);

  auto jacobian = [&](const RVector& zc, const RVector& rc) {
    for (Index j = 0; j < n; ++j) {
      const double step = opts.fd_step * std::max(std::abs(zc[j]), 1.0);
      RVector zp = zc;
      double dir = 1.0;
      if (zc[j] + step > hi[j]) dir = -1.0;
      zp[j] = zc[j] + dir * step;
      jac.col(j) = (eval(zp) - rc) / (dir * step);
    }
  };

  bool need_jac = true;
  RMatrix jtj;
  RVector grad;
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    if (need_jac) {
      jacobian(z, r);
      jtj = jac.transpose() * jac;
      grad = jac.transpose() * r;
      need_jac = false;
    }
    // Projected gradient: ignore components pushing against an active bound.
    double gmax = 0.0;
    for (Index i = 0; i < n; ++i) {
      const bool blocked = (z[i] <= lo[i] && grad[i] > 0.0) || (z[i] >= hi[i] && grad[i] < 0.0);
      if (!blocked) gmax = std::max(gmax, std::abs(grad[i]));
    }
    if (gmax <= opts.gtol * std::max(cost, 1e-300)) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }

    bool improved = false;
    for (int inner = 0; inner < 30; ++inner) {
      RMatrix a = jtj;
      for (Index i = 0; i < n; ++i) a(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      const RVector dz = a.ldlt().solve(-grad);
      const RVector z_new = clamp(z + dz);
      const RVector step = z_new - z;
      const RVector r_new = eval(z_new);
      const double cost_new = 0.5 * r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new < cost) {
        const double rel = (cost - cost_new) / std::max(cost, 1e-300);
        const double step_rel = step.norm() / (z.norm() + opts.xtol);
        z = z_new;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        need_jac = true;
        if (rel < opts.ftol || step_rel < opts.xtol) {
          res.converged = true;
          res.message = rel < opts.ftol ? "cost tolerance reached" : "step tolerance reached";
        }
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e16) break;
    }
    if (res.converged) break;
    if (!improved) {
      res.converged = true;
      res.message = "no further decrease";
      break;
    }
  }
  if (!res.converged) res.message = "iteration limit reached";

  res.x = z.cwiseProduct(scale);
  res.residuals = r;
  res.cost = cost;
  res.at_bound.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double tol = 1e-9 * std::max(std::abs(z[i]), 1.0);
    res.at_bound[i] = (lo[i] < hi[i]) && (z[i] - lo[i] <= tol || hi[i] - z[i] <= tol);
  }
  jacobian(z, r);
  res.jacobian = jac * scale.cwiseInverse().asDiagonal();
  return res;
}

CVector complex_linear_lsq(const CMatrix& a, const CVector& y) {
  if (a.rows() != y.size()) throw std::invalid_argument("complex_linear_lsq: dimension mismatch");
  return a.colPivHouseholderQr().solve(y);
}

ParabolaVertex parabolic_peak(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("parabolic_peak: bad input");
  const std::size_t k = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (k == 0 || k + 1 == x.size()) return {x[k], y[k], false};
  const double x0 = x[k - 1], x1 = x[k], x2 = x[k + 1];
  const double y0 = y[k - 1], y1 = y[k], y2 = y[k + 1];
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
  const double c = (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1 + x0 * x1 * (x0 - x1) * y2) / denom;
  if (!(a < 0.0)) return {x1, y1, true};
  const double xv = -b / (2.0 * a);
  return {xv, c - b * b / (4.0 * a), true};
}

}  // namespace lgtsim
