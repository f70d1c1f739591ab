#include "lgtsim/readout.hpp"

#include "lgtsim/lsq.hpp"
#include "lgtsim/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

namespace lgtsim::readout {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

double coherence_decay(const DecayRates& r, double gamma_phi) {
  return 0.5 * (r.down[0] + r.down[1] + r.down[4]) + gamma_phi;
}

// Right-hand side with the pulse values frozen for one segment.
struct Rhs {
  const ReadoutParams& rp;
  RMatrix g;
  double gamma2;
  double delta;
  cplx omega;
  cplx eps;
  double detuning;  // omega_r - omega_m
  FieldModel model;

  Rhs(const ReadoutParams& p, double delta_, cplx omega_, cplx eps_, double omega_m, FieldModel m)
      : rp(p),
        g(rate_matrix(p.rates)),
        gamma2(coherence_decay(p.rates, p.gamma_phi)),
        delta(delta_),
        omega(omega_),
        eps(eps_),
        detuning(p.omega_r - omega_m),
        model(m) {}

  void operator()(const CVector& y, CVector& dy) const {
    const cplx c = y[5];
    const double n = y[6].real();
    const cplx a_mf = y[7];
    const cplx b = y[13];
    const cplx bc = y[14];
    cplx a_sum{0.0, 0.0};
    for (int s = 0; s < kStates; ++s) a_sum += y[8 + s];
    const cplx a = model == FieldModel::state_resolved ? a_sum : a_mf;
    const double p001 = y[s001].real();
    const double p110 = y[s110].real();
    const double kappa = rp.kappa();
    const double kerr = 2.0 * rp.alpha * n;

    for (int s = 0; s < kStates; ++s) {
      cplx dp{0.0, 0.0};
      cplx da{0.0, 0.0};
      for (int q = 0; q < kStates; ++q) {
        dp += g(s, q) * y[q].real();
        da += g(s, q) * y[8 + q];
      }
      da += -kI * (detuning + kerr + 2.0 * rp.chi[s]) * y[8 + s] - 0.5 * kappa * y[8 + s] - kI * eps * y[s].real();
      dy[s] = dp;
      dy[8 + s] = da;
    }
    const cplx hop = std::conj(omega) * std::conj(c) - omega * c;
    dy[s001] += -kI * hop;
    dy[s110] += kI * hop;
    const cplx hop_a = std::conj(omega) * bc - omega * b;
    dy[8 + s001] += -kI * hop_a;
    dy[8 + s110] += kI * hop_a;

    const double stark = 2.0 * (rp.chi[s110] - rp.chi[s001]) * n;
    dy[5] = kI * (-delta + stark) * c + kI * std::conj(omega) * (p001 - p110) - gamma2 * c;
    dy[6] = -kI * eps * std::conj(a) + kI * std::conj(eps) * a - kappa * n;

    double chi_mean = 0.0;
    for (int s = 0; s < kStates; ++s) chi_mean += rp.chi[s] * y[s].real();
    dy[7] = -kI * (detuning + kerr + 2.0 * chi_mean) * a_mf - kI * eps - 0.5 * kappa * a_mf;

    const double f = rp.coherence_field_chi_factor;
    const cplx dlt = y[8 + s001] - y[8 + s110];
    dy[13] = kI * (stark - f * rp.chi[s001]) * b - kI * delta * b + kI * std::conj(omega) * dlt -
             (gamma2 + 0.5 * kappa) * b - kI * (detuning + kerr) * b - kI * eps * c;
    dy[14] = kI * (-stark - f * rp.chi[s110]) * bc + kI * delta * bc - kI * omega * dlt -
             (gamma2 + 0.5 * kappa) * bc - kI * (detuning + kerr) * bc - kI * eps * std::conj(c);
  }
};

void check_state(const CavityBlochState& s, double t, CavityBlochTrajectory& tr) {
  const double perr = std::abs(s.population_sum() - 1.0);
  tr.max_population_error = std::max(tr.max_population_error, perr);
  tr.min_photons = std::min(tr.min_photons, s.photons);
  tr.max_coherence = std::max(tr.max_coherence, std::abs(s.coherence));
  const double lim = 10.0 * kPopulationTolerance;
  std::ostringstream msg;
  if (perr > lim) {
    msg << "population sum off by " << perr << " at t = " << t;
  } else if (s.photons < -10.0 * 1e-9) {
    msg << "negative photon number " << s.photons << " at t = " << t;
  } else if (std::abs(s.coherence) > 0.5 + 10.0 * 1e-9) {
    msg << "coherence magnitude " << std::abs(s.coherence) << " exceeds 1/2 at t = " << t;
  } else {
    return;
  }
  throw InvariantError("integrate_cavity_bloch: " + msg.str());
}

CMatrix population_generator(const ReadoutParams& rp, const ExperimentParams& e) {
  // (P001, P110, P100, P010, P000, C, C*) with the field in vacuum.
  CMatrix m = CMatrix::Zero(7, 7);
  m.topLeftCorner(kStates, kStates) = rate_matrix(rp.rates).cast<cplx>();
  const cplx omega = -e.j;
  const double g2 = coherence_decay(rp.rates, rp.gamma_phi);
  m(s001, 6) += -kI * std::conj(omega);
  m(s001, 5) += kI * omega;
  m(s110, 6) += kI * std::conj(omega);
  m(s110, 5) += -kI * omega;
  m(5, 5) = -kI * e.delta - g2;
  m(5, s001) = kI * std::conj(omega);
  m(5, s110) = -kI * std::conj(omega);
  m(6, 6) = kI * e.delta - g2;
  m(6, s001) = -kI * omega;
  m(6, s110) = kI * omega;
  return m;
}

}  // namespace

int state_from_label(const std::string& label) {
  for (int s = 0; s < kStates; ++s)
    if (kStateLabels[s] == label) return s;
  throw std::invalid_argument("unknown readout state '" + label + "'");
}

RMatrix rate_matrix(const DecayRates& r) {
  RMatrix g = RMatrix::Zero(kStates, kStates);
  for (std::size_t i = 0; i < kDecayChannels.size(); ++i) {
    const int f = kDecayChannels[i].from;
    const int t = kDecayChannels[i].to;
    g(t, f) += r.down[i];
    g(f, f) -= r.down[i];
    g(f, t) += r.up[i];
    g(t, t) -= r.up[i];
  }
  return g;
}

void ReadoutParams::validate() const {
  if (!std::isfinite(omega_r) || !std::isfinite(alpha)) throw std::invalid_argument("ReadoutParams: non-finite frequency");
  if (!finite_nonneg(kappa_int) || !finite_nonneg(kappa_ext))
    throw std::invalid_argument("ReadoutParams: kappa_int and kappa_ext must be >= 0");
  for (double c : chi)
    if (!std::isfinite(c)) throw std::invalid_argument("ReadoutParams: non-finite chi");
  for (std::size_t i = 0; i < rates.down.size(); ++i) {
    if (!finite_nonneg(rates.down[i]) || !finite_nonneg(rates.up[i]))
      throw std::invalid_argument("ReadoutParams: decay rates must be >= 0");
    if (rates.up[i] > rates.down[i])
      throw std::invalid_argument("ReadoutParams: reversed rate exceeds forward rate for " +
                                  kStateLabels[kDecayChannels[i].from] + "->" + kStateLabels[kDecayChannels[i].to]);
  }
  if (!finite_nonneg(gamma_phi)) throw std::invalid_argument("ReadoutParams: gamma_phi must be >= 0");
}

CVector CavityBlochState::pack() const {
  CVector y(kSize);
  for (int s = 0; s < kStates; ++s) y[s] = p[s];
  y[5] = coherence;
  y[6] = photons;
  y[7] = field;
  for (int s = 0; s < kStates; ++s) y[8 + s] = state_field[s];
  y[13] = coherence_field;
  y[14] = coherence_field_rev;
  return y;
}

CavityBlochState CavityBlochState::unpack(const CVector& y) {
  if (y.size() != kSize) throw std::invalid_argument("CavityBlochState::unpack: wrong size");
  CavityBlochState s;
  for (int k = 0; k < kStates; ++k) s.p[k] = y[k].real();
  s.coherence = y[5];
  s.photons = y[6].real();
  s.field = y[7];
  for (int k = 0; k < kStates; ++k) s.state_field[k] = y[8 + k];
  s.coherence_field = y[13];
  s.coherence_field_rev = y[14];
  return s;
}

double CavityBlochState::population_sum() const {
  double t = 0.0;
  for (double v : p) t += v;
  return t;
}

cplx CavityBlochState::resolved_field() const {
  cplx a{0.0, 0.0};
  for (const cplx& v : state_field) a += v;
  return a;
}

CVector cavity_bloch_rhs(const ReadoutParams& rp, const PulseSchedule& sched, double t, const CVector& y,
                         FieldModel model) {
  const Rhs f(rp, sched.delta, sched.omega_at(t), sched.epsilon_at(t), sched.omega_m, model);
  CVector dy(y.size());
  f(y, dy);
  return dy;
}

CavityBlochTrajectory integrate_cavity_bloch(const ReadoutParams& rp, const PulseSchedule& sched,
                                             const CavityBlochState& y0, const std::vector<double>& t_grid,
                                             FieldModel model, const OdeOptions& opts) {
  rp.validate();
  if (t_grid.empty()) throw std::invalid_argument("integrate_cavity_bloch: empty time grid");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()))
    throw std::invalid_argument("integrate_cavity_bloch: time grid must be sorted");
  if (sched.t_evolve < 0.0 || sched.t_readout < 0.0)
    throw std::invalid_argument("integrate_cavity_bloch: negative pulse length");

  CavityBlochTrajectory tr;
  tr.min_photons = y0.photons;
  check_state(y0, t_grid.front(), tr);

  // Integrate piecewise so that no step straddles a pulse edge.
  const double t0 = t_grid.front();
  const double t_end = t_grid.back();
  std::vector<double> edges{t0};
  for (double e : {sched.t_evolve, sched.t_evolve + sched.t_readout})
    if (e > t0 && e < t_end) edges.push_back(e);
  edges.push_back(t_end);

  CVector y = y0.pack();
  std::size_t next = 0;
  auto record = [&](double t, const CVector& v) {
    const CavityBlochState s = CavityBlochState::unpack(v);
    check_state(s, t, tr);
    tr.times.push_back(t);
    tr.states.push_back(s);
  };
  while (next < t_grid.size() && t_grid[next] <= t0) record(t_grid[next++], y);

  for (std::size_t seg = 0; seg + 1 < edges.size(); ++seg) {
    const double a = edges[seg];
    const double b = edges[seg + 1];
    if (b <= a) continue;
    const double mid = 0.5 * (a + b);
    const Rhs f(rp, sched.delta, sched.omega_at(mid), sched.epsilon_at(mid), sched.omega_m, model);
    std::vector<double> samples;
    for (std::size_t k = next; k < t_grid.size() && t_grid[k] <= b; ++k) samples.push_back(t_grid[k]);
    const Trajectory traj =
        integrate_ode([&f](double, const CVector& v, CVector& dv) { f(v, dv); }, y, a, b, samples, opts);
    if (!samples.empty()) {
      for (std::size_t k = 0; k < samples.size(); ++k) record(samples[k], traj.states[k]);
      next += samples.size();
    }
    y = traj.final_state;
  }
  return tr;
}

std::vector<cplx> output_signal(const CavityBlochTrajectory& traj, const ReadoutParams& rp,
                                const PulseSchedule& sched, FieldModel model) {
  std::vector<cplx> out(traj.times.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const CavityBlochState& s = traj.states[k];
    const cplx a = model == FieldModel::state_resolved ? s.resolved_field() : s.field;
    out[k] = sched.epsilon_at(traj.times[k]) - 0.5 * kI * rp.kappa_ext * a;
  }
  return out;
}

cplx steady_state_field(const ReadoutParams& rp, int s, cplx epsilon_m, double omega_m) {
  if (s < 0 || s >= kStates) throw std::invalid_argument("steady_state_field: bad state");
  return -kI * epsilon_m / (kI * (rp.omega_r + 2.0 * rp.chi[s] - omega_m) + 0.5 * rp.kappa());
}

void ExperimentParams::validate() const {
  if (!finite_nonneg(j) || !std::isfinite(delta)) throw std::invalid_argument("ExperimentParams: bad J or delta");
  if (!finite_nonneg(p100) || !finite_nonneg(p010) || !finite_nonneg(p001) || p100 + p010 + p001 > 1.0)
    throw std::invalid_argument("ExperimentParams: thermal populations must be >= 0 and sum to at most 1");
}

std::array<double, kStates> initial_populations(const ExperimentParams& e) {
  e.validate();
  std::array<double, kStates> p{};
  p[s100] = e.p100;
  p[s010] = e.p010;
  p[s001] = 1.0 - e.p100 - e.p010 - e.p001;  // former 000 population
  p[s000] = e.p001;
  return p;
}

std::size_t ReadoutWindow::samples() const {
  if (!(dt > 0.0) || !(t_readout > 0.0)) throw std::invalid_argument("ReadoutWindow: dt and t_readout must be > 0");
  return static_cast<std::size_t>(std::llround(t_readout / dt));
}

std::vector<double> ReadoutWindow::times() const {
  const std::size_t n = samples();
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

std::vector<cplx> experiment_trace(const ReadoutParams& rp, const ExperimentParams& e, double t_evolve, double omega_m,
                                   const ReadoutWindow& w, FieldModel model) {
  if (t_evolve < 0.0) throw std::invalid_argument("experiment_trace: t_evolve must be >= 0");
  PulseSchedule sched;
  sched.omega = -e.j;
  sched.delta = e.delta;
  sched.t_evolve = t_evolve;
  sched.epsilon_m = w.epsilon_m;
  sched.omega_m = omega_m;
  sched.t_readout = w.t_readout;

  CavityBlochState y0;
  y0.p = initial_populations(e);
  // The state is prepared at t = 0; only the readout window is returned.
  std::vector<double> grid;
  if (t_evolve > 0.0) grid.push_back(0.0);
  for (double t : w.times()) grid.push_back(t_evolve + t);
  const auto traj = integrate_cavity_bloch(rp, sched, y0, grid, model);
  auto out = output_signal(traj, rp, sched, model);
  if (t_evolve > 0.0) out.erase(out.begin());
  return out;
}

std::vector<std::array<double, kStates>> populations_vs_time(const ReadoutParams& rp, const ExperimentParams& e,
                                                             const std::vector<double>& t_evolve) {
  const CMatrix m = population_generator(rp, e);
  CVector y0 = CVector::Zero(7);
  const auto p0 = initial_populations(e);
  for (int s = 0; s < kStates; ++s) y0[s] = p0[s];
  std::vector<std::array<double, kStates>> out(t_evolve.size());
  if (t_evolve.empty()) return out;

  // Uniform grids reuse one step propagator.
  bool uniform = t_evolve.size() > 2;
  const double h = uniform ? t_evolve[1] - t_evolve[0] : 0.0;
  for (std::size_t k = 2; uniform && k < t_evolve.size(); ++k)
    uniform = std::abs(t_evolve[k] - t_evolve[0] - static_cast<double>(k) * h) <= 1e-9 * std::max(1.0, std::abs(h) * k);
  uniform = uniform && h > 0.0;
  CMatrix step;
  CVector y;
  if (uniform) {
    step = (m * h).exp();
    y = (m * t_evolve[0]).exp() * y0;
  }
  for (std::size_t k = 0; k < t_evolve.size(); ++k) {
    if (uniform) {
      if (k > 0) y = step * y;
    } else {
      y = (m * t_evolve[k]).exp() * y0;
    }
    for (int s = 0; s < kStates; ++s) out[k][s] = y[s].real();
  }
  return out;
}

std::array<std::vector<cplx>, kStates> basis_responses(const ReadoutParams& rp, double omega_m, const ReadoutWindow& w) {
  if (rp.alpha != 0.0) throw std::invalid_argument("basis_responses: requires alpha = 0");
  const Index n = 2 * kStates;
  const RMatrix g = rate_matrix(rp.rates);
  CMatrix r = CMatrix::Zero(n, n);
  r.topLeftCorner(kStates, kStates) = g.cast<cplx>();
  r.bottomRightCorner(kStates, kStates) = g.cast<cplx>();
  for (int s = 0; s < kStates; ++s) {
    r(kStates + s, kStates + s) += -kI * (rp.omega_r - omega_m + 2.0 * rp.chi[s]) - 0.5 * rp.kappa();
    r(kStates + s, s) = -kI * w.epsilon_m;
  }
  const CMatrix step = (r * w.dt).exp();
  CMatrix z = CMatrix::Zero(n, kStates);
  z.topRows(kStates) = CMatrix::Identity(kStates, kStates);

  const std::size_t samples = w.samples();
  std::array<std::vector<cplx>, kStates> out;
  for (auto& v : out) v.resize(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    if (k > 0) z = step * z;
    for (int s = 0; s < kStates; ++s) out[s][k] = w.epsilon_m - 0.5 * kI * rp.kappa_ext * z.col(s).tail(kStates).sum();
  }
  return out;
}

std::vector<cplx> linear_trace(const std::array<std::vector<cplx>, kStates>& responses,
                               const std::array<double, kStates>& p) {
  std::vector<cplx> out(responses[0].size(), cplx(0.0, 0.0));
  for (int s = 0; s < kStates; ++s)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += p[s] * responses[s][k];
  return out;
}

std::vector<double> default_readout_frequencies(const ReadoutParams& rp, double min_separation) {
  std::vector<double> out{rp.omega_r};
  for (int s = 0; s < kStates; ++s) {
    const double w = rp.omega_r + 2.0 * rp.chi[s];
    bool seen = false;
    for (double v : out) seen = seen || std::abs(v - w) <= min_separation;
    if (!seen) out.push_back(w);
  }
  return out;
}

ReadoutDataset synthesize_dataset(const std::vector<ReadoutParams>& resonators, const SyntheticTruth& truth,
                                  const std::vector<double>& t_evolve, const ReadoutWindow& w, double noise_rel,
                                  std::uint64_t seed, int threads) {
  if (noise_rel < 0.0) throw std::invalid_argument("synthesize_dataset: noise must be >= 0");
  ReadoutDataset d;
  d.t_evolve = t_evolve;
  d.window = w;
  for (const auto& r0 : resonators) {
    ReadoutParams r = r0;
    r.rates = truth.rates;
    r.gamma_phi = truth.gamma_phi;
    r.validate();
    const int idx = static_cast<int>(d.resonators.size());
    d.resonators.push_back(r);
    for (double wm : default_readout_frequencies(r)) d.channels.push_back({idx, wm});
  }
  const std::size_t nt = t_evolve.size();
  d.traces.assign(d.channels.size(), std::vector<std::vector<cplx>>(nt));
  parallel_for(d.channels.size() * nt, threads, [&](std::size_t i) {
    const std::size_t c = i / nt;
    const std::size_t k = i % nt;
    const Channel& ch = d.channels[c];
    d.traces[c][k] = experiment_trace(d.resonators[ch.resonator], truth.experiment, t_evolve[k], ch.omega_m, w);
  });
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise_rel * std::abs(w.epsilon_m));
  for (auto& ch : d.traces)
    for (auto& tr : ch)
      for (auto& v : tr) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v += cplx(re, im);
      }
  return d;
}

namespace {

struct FitModel {
  const ReadoutDataset& data;
  std::array<double, 5> up;
  double eps_abs;
  std::size_t samples;
  std::vector<CMatrix> y;  // per channel, t_evolve x readout sample
  static constexpr std::size_t kCacheSize = 8;
  mutable std::deque<std::pair<std::array<double, 5>, std::vector<CMatrix>>> cache;

  FitModel(const ReadoutDataset& d, const std::array<double, 5>& up_)
      : data(d), up(up_), eps_abs(std::abs(d.window.epsilon_m)), samples(d.window.samples()) {
    const auto nt = static_cast<Index>(d.t_evolve.size());
    for (const auto& ch : d.traces) {
      CMatrix m(nt, static_cast<Index>(samples));
      for (Index k = 0; k < nt; ++k)
        for (Index j = 0; j < m.cols(); ++j) m(k, j) = ch[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      y.push_back(std::move(m));
    }
  }

  SyntheticTruth unpack(const RVector& x) const {
    SyntheticTruth t;
    for (int i = 0; i < 5; ++i) t.rates.down[i] = x[i];
    t.rates.up = up;
    t.gamma_phi = x[5];
    t.experiment.j = x[6];
    t.experiment.delta = std::sqrt(std::max(x[7], 0.0));  // fitted as delta^2
    t.experiment.p100 = x[8];
    t.experiment.p010 = x[9];
    t.experiment.p001 = x[10];
    return t;
  }

  ReadoutParams resonator(std::size_t r, const SyntheticTruth& t) const {
    ReadoutParams p = data.resonators[r];
    p.rates = t.rates;
    p.gamma_phi = t.gamma_phi;
    return p;
  }

  // The readout responses depend on the decay rates only, so finite-difference steps in
  // the other parameters reuse them.
  std::vector<CMatrix> responses(const SyntheticTruth& t) const {
    for (const auto& [key, value] : cache)
      if (key == t.rates.down) return value;
    const auto ns = static_cast<Index>(samples);
    std::vector<CMatrix> out(data.channels.size());
    for (std::size_t c = 0; c < out.size(); ++c) {
      const Channel& ch = data.channels[c];
      const auto resp = basis_responses(resonator(static_cast<std::size_t>(ch.resonator), t), ch.omega_m, data.window);
      out[c].resize(kStates, ns);
      for (int s = 0; s < kStates; ++s)
        for (Index j = 0; j < ns; ++j) out[c](s, j) = resp[s][static_cast<std::size_t>(j)];
    }
    if (cache.size() >= kCacheSize) cache.pop_front();
    cache.emplace_back(t.rates.down, out);
    return out;
  }

  struct Evaluation {
    std::vector<std::array<double, kStates>> populations;
    std::vector<CMatrix> responses;  // per channel, state x readout sample
    std::vector<cplx> scale, offset;
    RVector residual;
  };

  Evaluation evaluate(const RVector& x) const {
    const SyntheticTruth t = unpack(x);
    Evaluation ev;
    ev.populations = populations_vs_time(resonator(0, t), t.experiment, data.t_evolve);
    const std::size_t nc = data.channels.size();
    const auto nt = static_cast<Index>(data.t_evolve.size());
    const auto ns = static_cast<Index>(samples);
    CMatrix pm(nt, kStates);
    for (Index k = 0; k < nt; ++k)
      for (int s = 0; s < kStates; ++s) pm(k, s) = ev.populations[static_cast<std::size_t>(k)][s];
    ev.scale.resize(nc);
    ev.offset.resize(nc);
    ev.residual.resize(2 * static_cast<Index>(nc) * nt * ns);
    Index pos = 0;
    ev.responses = responses(t);
    for (std::size_t c = 0; c < nc; ++c) {
      const CMatrix model = pm * ev.responses[c];
      const CMatrix& yc = y[c];
      // Closed-form complex affine fit y ≈ a m + b.
      const cplx mm = model.mean();
      const cplx my = yc.mean();
      const CMatrix dm = model.array() - mm;
      const double smm = dm.squaredNorm();
      const cplx smy = (dm.conjugate().array() * (yc.array() - my)).sum();
      const cplx a = smm > 0.0 ? smy / smm : cplx(1.0, 0.0);
      const cplx b = my - a * mm;
      ev.scale[c] = a;
      ev.offset[c] = b;
      for (Index k = 0; k < nt; ++k)
        for (Index j = 0; j < ns; ++j) {
          const cplx res = (yc(k, j) - a * model(k, j) - b) / eps_abs;
          ev.residual[pos++] = res.real();
          ev.residual[pos++] = res.imag();
        }
    }
    return ev;
  }
};

void check_dataset(const ReadoutDataset& d) {
  if (d.resonators.empty() || d.channels.empty() || d.t_evolve.empty())
    throw FitError("fit_populations: empty dataset");
  if (d.traces.size() != d.channels.size()) throw FitError("fit_populations: traces do not match channels");
  const std::size_t samples = d.window.samples();
  for (const auto& ch : d.traces) {
    if (ch.size() != d.t_evolve.size()) throw FitError("fit_populations: trace count does not match t_evolve grid");
    for (const auto& tr : ch)
      if (tr.size() != samples) throw FitError("fit_populations: trace length does not match readout window");
  }
  std::vector<std::vector<double>> freqs(d.resonators.size());
  for (const auto& ch : d.channels) {
    if (ch.resonator < 0 || static_cast<std::size_t>(ch.resonator) >= d.resonators.size())
      throw FitError("fit_populations: channel refers to unknown resonator");
    auto& f = freqs[static_cast<std::size_t>(ch.resonator)];
    if (std::none_of(f.begin(), f.end(), [&](double v) { return std::abs(v - ch.omega_m) < 1e-12; }))
      f.push_back(ch.omega_m);
  }
  for (std::size_t r = 0; r < freqs.size(); ++r)
    if (freqs[r].size() < 3)
      throw FitError("fit_populations: resonator " + std::to_string(r) + " has fewer than 3 readout frequencies");
  for (const auto& r : d.resonators)
    if (r.alpha != 0.0) throw FitError("fit_populations: the linear readout model requires alpha = 0");
}

}  // namespace

FitResult fit_populations(const ReadoutDataset& data, const SyntheticTruth& guess, const FitOptions& opts) {
  check_dataset(data);
  if (opts.starts < 1) throw std::invalid_argument("fit_populations: need at least one start");
  const FitModel model(data, guess.rates.up);

  RVector x0(kFitParameters), lo(kFitParameters), hi(kFitParameters), scale(kFitParameters);
  for (int i = 0; i < 5; ++i) {
    x0[i] = guess.rates.down[i];
    lo[i] = 1e-6;
    hi[i] = 1e-1;
  }
  x0[5] = guess.gamma_phi;
  lo[5] = 0.0;
  hi[5] = 1e-1;
  x0[6] = guess.experiment.j;
  lo[6] = 0.2 * guess.experiment.j;
  hi[6] = 5.0 * guess.experiment.j;
  // Populations depend on the detuning only through delta^2, which is the fitted variable.
  x0[7] = guess.experiment.delta * guess.experiment.delta;
  lo[7] = 0.0;
  hi[7] = 4.0 * guess.experiment.j * guess.experiment.j;
  x0[8] = guess.experiment.p100;
  x0[9] = guess.experiment.p010;
  x0[10] = guess.experiment.p001;
  for (int i = 8; i < 11; ++i) {
    lo[i] = 0.0;
    hi[i] = 0.3;
  }
  for (int i = 0; i < kFitParameters; ++i) {
    x0[i] = std::clamp(x0[i], lo[i], hi[i]);
    if (!(lo[i] < hi[i])) throw std::invalid_argument("fit_populations: degenerate bounds for " + kFitParameterNames[i]);
  }
  const double rate_scale = std::max(x0.head(5).maxCoeff(), 1e-5);
  for (int i = 0; i < 5; ++i) scale[i] = std::max(x0[i], 0.1 * rate_scale);
  scale[5] = std::max(x0[5], 0.1 * rate_scale);
  scale[6] = x0[6];
  scale[7] = 0.01 * x0[6] * x0[6];
  for (int i = 8; i < 11; ++i) scale[i] = 0.02;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<RVector> starts{x0};
  for (int s = 1; s < opts.starts; ++s) {
    RVector x = x0;
    for (int i = 0; i < kFitParameters; ++i) {
      const double z = gauss(rng);
      if (i == 7)
        x[i] = std::pow(std::sqrt(x[i]) + opts.start_spread * 0.1 * scale[6] * std::abs(z), 2);
      else if (i == 6)
        x[i] *= std::exp(0.3 * opts.start_spread * z);
      else
        x[i] = std::max(x[i], 0.2 * scale[i]) * std::exp(opts.start_spread * z);
      x[i] = std::clamp(x[i], lo[i] + 1e-3 * (hi[i] - lo[i]), hi[i] - 1e-3 * (hi[i] - lo[i]));
    }
    starts.push_back(x);
  }

  const ResidualFn f = [&model](const RVector& x) { return model.evaluate(x).residual; };
  LsqOptions lopts;
  lopts.max_iterations = opts.max_iterations;
  lopts.ftol = opts.ftol;
  lopts.xtol = 1e-9;

  FitResult out;
  LsqResult best;
  bool have = false;
  for (int s = 0; s < opts.starts; ++s) {
    LsqResult r = levenberg_marquardt(f, starts[static_cast<std::size_t>(s)], lo, hi, scale, lopts);
    out.evaluations += r.evaluations;
    if (!have || r.cost < best.cost) {
      best = std::move(r);
      out.best_start = s;
      have = true;
    }
  }

  const auto ev = model.evaluate(best.x);
  for (int i = 0; i < kFitParameters; ++i) out.x[i] = best.x[i];
  out.x[7] = out.params.experiment.delta;
  out.params = model.unpack(best.x);
  out.scale = ev.scale;
  out.offset = ev.offset;
  out.cost = best.cost;
  out.rms_residual = std::sqrt(ev.residual.squaredNorm() / static_cast<double>(ev.residual.size()));
  out.populations = ev.populations;
  // Zero is a physical limit for gamma_phi, delta^2 and the thermal populations; only the
  // other box limits count as failures.
  std::vector<std::string> artificial;
  for (int i = 0; i < kFitParameters; ++i) {
    if (!best.at_bound[static_cast<std::size_t>(i)]) continue;
    out.at_bound.push_back(kFitParameterNames[i]);
    const bool at_lower = best.x[i] - lo[i] <= hi[i] - best.x[i];
    const bool physical_zero = (i == 5 || i >= 7) && at_lower;
    if (!physical_zero) artificial.push_back(kFitParameterNames[i]);
  }

  // Rescale the data with the fitted scale, offset and response shapes. The 001 and 000
  // responses coincide when their dispersive shifts do, so their sum is what the data fix.
  const std::size_t nc = data.channels.size();
  const std::size_t ns = model.samples;
  out.rescaled.resize(data.t_evolve.size());
  for (std::size_t k = 0; k < data.t_evolve.size(); ++k) {
    RMatrix a(static_cast<Index>(2 * nc * ns), 4);
    RVector y(a.rows());
    Index row = 0;
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& resp = ev.responses[c];
      for (std::size_t j = 0; j < ns; ++j) {
        const cplx yy = (data.traces[c][k][j] - ev.offset[c]) / ev.scale[c];
        const auto jj = static_cast<Index>(j);
        const cplx cols[4] = {resp(s110, jj), resp(s100, jj), resp(s010, jj), 0.5 * (resp(s001, jj) + resp(s000, jj))};
        for (int q = 0; q < 4; ++q) {
          a(row, q) = cols[q].real();
          a(row + 1, q) = cols[q].imag();
        }
        y[row] = yy.real();
        y[row + 1] = yy.imag();
        row += 2;
      }
    }
    const RVector sol = a.colPivHouseholderQr().solve(y);
    for (int q = 0; q < 4; ++q) out.rescaled[k][static_cast<std::size_t>(q)] = sol[q];
  }

  if (opts.reject_at_bound && !artificial.empty()) {
    std::string names;
    for (const auto& n : artificial) names += (names.empty() ? "" : ", ") + n;
    throw FitError("fit_populations: parameters at bound: " + names);
  }
  if (opts.residual_limit > 0.0 && out.rms_residual > opts.residual_limit) {
    std::ostringstream msg;
    msg << "fit_populations: rms residual " << out.rms_residual << " exceeds " << opts.residual_limit;
    throw FitError(msg.str());
  }
  return out;
}

GaugeDiagnostics gauge_diagnostics(const std::array<double, kStates>& p) {
  // sigma^z = +1 on the ground state of each qubit.
  static constexpr int kBits[kStates][3] = {{0, 0, 1}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 0}};
  GaugeDiagnostics g;
  for (int s = 0; s < kStates; ++s) {
    g.sigma_z1 += p[s] * (1 - 2 * kBits[s][0]);
    g.tau_z += p[s] * (1 - 2 * kBits[s][1]);
    g.sigma_z2 += p[s] * (1 - 2 * kBits[s][2]);
  }
  g.p_inv = p[s110] + p[s001];
  g.g1 = 0.5 * g.sigma_z1 - 0.5 * g.tau_z;
  g.g2 = 0.5 * g.sigma_z2 + 0.5 * g.tau_z;
  return g;
}

std::vector<GaugeDiagnostics> gauge_diagnostics(const std::vector<std::array<double, kStates>>& p) {
  std::vector<GaugeDiagnostics> out;
  out.reserve(p.size());
  for (const auto& v : p) out.push_back(gauge_diagnostics(v));
  return out;
}

ReadoutParams reference_resonator(int index) {
  // (omega_r, kappa_int, kappa) in GHz / MHz and 2 chi per qubit in MHz.
  struct Row {
    double f_ghz, kint_mhz, k_mhz;
    double two_chi[3];
  };
  static constexpr Row kRows[3] = {
      {7.698, 0.439, 0.650, {-7.3, -0.4, 0.0}},
      {7.518, 0.489, 0.643, {-2.2, -2.4, 0.0}},
      {7.035, 5.1, 6.37, {-2.0, -3.0, -0.5}},
  };
  if (index < 1 || index > 3) throw std::invalid_argument("reference_resonator: index must be 1, 2 or 3");
  const Row& r = kRows[index - 1];
  static constexpr int kBits[kStates][3] = {{0, 0, 1}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 0}};
  ReadoutParams p;
  p.omega_r = ghz(r.f_ghz);
  p.kappa_int = mhz(r.kint_mhz);
  p.kappa_ext = mhz(r.k_mhz - r.kint_mhz);
  for (int s = 0; s < kStates; ++s) {
    double two_chi = 0.0;
    for (int q = 0; q < 3; ++q) two_chi += kBits[s][q] * r.two_chi[q];
    p.chi[s] = 0.5 * mhz(two_chi);
  }
  const SyntheticTruth t = reference_truth();
  p.rates = t.rates;
  p.gamma_phi = t.gamma_phi;
  return p;
}

SyntheticTruth reference_truth() {
  SyntheticTruth t;
  // Lifetimes in ns for 110->100, 110->010, 100->000, 010->000, 001->000.
  const double life[5] = {1561.0, 6600.0, 4216.0, 1302.0, 1280.0};
  for (int i = 0; i < 5; ++i) t.rates.down[i] = 1.0 / life[i];
  t.gamma_phi = 1.0 / 3000.0;
  t.experiment.j = mhz(2.31);
  t.experiment.delta = mhz(0.1);
  t.experiment.p100 = 0.02;
  t.experiment.p010 = 0.03;
  t.experiment.p001 = 0.04;
  return t;
}

}  // namespace lgtsim::readout
