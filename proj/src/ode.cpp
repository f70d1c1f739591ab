#include "lgtsim/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lgtsim {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense output coefficients (Hairer, Norsett, Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double error_norm(const CVector& err, const CVector& y, const CVector& y1, double rtol, double atol) {
  double acc = 0.0;
  for (Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
    const double r = std::abs(err[i]) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(std::max<Index>(err.size(), 1)));
}

}  // namespace

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  out[n - 1] = b;
  return out;
}

Trajectory integrate_ode(const OdeRhs& f, const CVector& y0, double t0, double t1,
                         const std::vector<double>& sample_times, const OdeOptions& opts) {
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) {
    throw std::invalid_argument("integrate_ode: rtol and atol must be positive");
  }
  if (t1 < t0) throw std::invalid_argument("integrate_ode: t1 < t0");
  std::vector<double> samples = sample_times;
  if (samples.empty()) samples.push_back(t1);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k] < t0 || samples[k] > t1 || (k > 0 && samples[k] < samples[k - 1])) {
      throw std::invalid_argument("integrate_ode: sample times must be sorted and inside the span");
    }
  }

  Trajectory traj;
  traj.times = samples;
  traj.states.reserve(samples.size());
  std::size_t next = 0;
  while (next < samples.size() && samples[next] == t0) {
    traj.states.push_back(y0);
    ++next;
  }

  const Index n = y0.size();
  CVector y = y0, y1(n), ytmp(n), err(n);
  CVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  double t = t0;
  f(t, y, k1);
  traj.rhs_evaluations = 1;

  const double span = t1 - t0;
  double h = opts.initial_step;
  if (!(h > 0.0)) {
    // Hairer's starting-step heuristic.
    double d0 = 0.0, d1n = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double sc = opts.atol + opts.rtol * std::abs(y[i]);
      d0 += std::norm(y[i]) / (sc * sc);
      d1n += std::norm(k1[i]) / (sc * sc);
    }
    d0 = std::sqrt(d0 / std::max<Index>(n, 1));
    d1n = std::sqrt(d1n / std::max<Index>(n, 1));
    h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h = std::min(h, span > 0 ? span : 1.0);
  }
  h = std::min(h, opts.max_step);

  const double facmin = 0.2, facmax = 10.0, safety = 0.9;
  double err_prev = 1e-4;
  bool rejected_last = false;

  while (t < t1 && next < samples.size()) {
    if (traj.accepted_steps + traj.rejected_steps >= opts.max_steps) {
      std::ostringstream os;
      os << "integrate_ode: step budget exhausted at t = " << t;
      throw OdeError(os.str(), t);
    }
    const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
    if (h < min_step) {
      std::ostringstream os;
      os << "integrate_ode: step size underflow at t = " << t;
      throw OdeError(os.str(), t);
    }
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }

    ytmp = y + h * a21 * k1;
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double t_new = last ? t1 : t + h;
    f(t_new, y1, k7);
    traj.rhs_evaluations += 6;

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, y1, opts.rtol, opts.atol);

    if (!std::isfinite(en)) {
      ++traj.rejected_steps;
      h *= facmin;
      rejected_last = true;
      continue;
    }
    if (en <= 1.0) {
      // Emit every requested sample inside (t, t_new].
      if (next < samples.size() && samples[next] <= t_new) {
        const CVector ydiff = y1 - y;
        const CVector bspl = h * k1 - ydiff;
        const CVector r4 = ydiff - h * k7 - bspl;
        const CVector r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next < samples.size() && samples[next] <= t_new) {
          if (samples[next] == t_new) {
            traj.states.push_back(y1);
          } else {
            const double th = (samples[next] - t) / h;
            const double th1 = 1.0 - th;
            traj.states.push_back(y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5))));
          }
          ++next;
        }
      }
      t = t_new;
      y = y1;
      k1 = k7;
      ++traj.accepted_steps;
      // PI step-size control.
      const double en_c = std::max(en, 1e-10);
      double fac = safety * std::pow(en_c, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, facmin, facmax);
      if (rejected_last) fac = std::min(fac, 1.0);
      err_prev = std::max(en, 1e-4);
      h = std::min(h * fac, opts.max_step);
      rejected_last = false;
    } else {
      ++traj.rejected_steps;
      h *= std::max(facmin, safety * std::pow(en, -1.0 / 5.0));
      rejected_last = true;
    }
  }
  traj.final_state = y;
  return traj;
}

}  // namespace lgtsim
