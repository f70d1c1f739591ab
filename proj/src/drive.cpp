#include "lgtsim/drive.hpp"

#include "lgtsim/lsq.hpp"
#include "lgtsim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lgtsim::drive {

void DriveSpec::validate() const {
  if (!(amplitude >= 0.0 && amplitude < 0.5)) throw std::invalid_argument("DriveSpec: amplitude must lie in [0, 0.5)");
  if (!(omega_p > 0.0)) throw std::invalid_argument("DriveSpec: omega_p must be positive");
  if (!(rise_time >= 0.0)) throw std::invalid_argument("DriveSpec: rise_time must be non-negative");
}

double DriveSpec::envelope(double t) const {
  if (t < 0.0) return 0.0;
  if (rise_time <= 0.0 || t >= rise_time) return 1.0;
  return t / rise_time;
}

Index DrivenModel::index(const std::string& label) const {
  auto it = labels.find(label);
  if (it == labels.end()) throw circuit::LabelingError("label " + label + " not resolvable in the driven subspace");
  return it->second;
}

DrivenModel make_driven_model(const circuit::CircuitParams& p, const circuit::DressedSpectrum& s, Index n_levels) {
  if (p.flux_bias != 0.0) throw std::invalid_argument("make_driven_model: the drive is defined at zero flux bias");
  if (n_levels < 5) throw std::invalid_argument("make_driven_model: need at least five levels");
  const Index m = std::min(n_levels, s.energies.size());
  DrivenModel d;
  d.params = p;
  d.energies = s.energies.head(m).array() - s.energies[0];
  const auto el = circuit::squid_matrix_elements(s, m);
  d.sin_phi2 = el.sin_phi2;
  d.cos_phi2 = el.cos_phi2;
  for (const auto& [label, idx] : s.labels) {
    if (idx < m) d.labels.emplace(label, idx);
  }
  for (const auto& lab : kTrackedLabels) d.index(lab);
  return d;
}

DrivenModel make_driven_model(const circuit::CircuitParams& p, const circuit::TransmonBasis& basis, Index n_levels) {
  return make_driven_model(p, circuit::dressed_spectrum(p, basis), n_levels);
}

namespace {

struct DriveCoefficients {
  double cos_channel;
  double sin_channel;
};

DriveCoefficients coefficients(const DrivenModel& m, const DriveSpec& d, double t) {
  const double x = kPi * d.alpha(t);
  return {-m.params.ej_sum * (std::cos(x) - 1.0), -m.params.dej * std::sin(x)};
}

// Interaction-picture generator W(t) = e^{i eps t} V(t) e^{-i eps t}.
void interaction_generator(const DrivenModel& m, const DriveSpec& d, double t, CMatrix& w) {
  const auto c = coefficients(m, d, t);
  const Index n = m.dim();
  CVector ph(n);
  for (Index l = 0; l < n; ++l) ph[l] = std::polar(1.0, m.energies[l] * t);
  w = c.cos_channel * m.cos_phi2 + c.sin_channel * m.sin_phi2;
  for (Index col = 0; col < n; ++col) {
    const cplx pc = std::conj(ph[col]);
    for (Index row = 0; row < n; ++row) w(row, col) *= ph[row] * pc;
  }
}

void record(DrivenEvolution& out, const DrivenModel& m, const CVector& psi) {
  std::vector<double> row;
  for (const auto& lab : out.labels) row.push_back(std::norm(psi[m.index(lab)]));
  out.max_norm_error = std::max(out.max_norm_error, std::abs(psi.norm() - 1.0));
  out.max_leakage = std::max(out.max_leakage, 1.0 - std::norm(psi[m.index("001")]) - std::norm(psi[m.index("110")]));
  out.populations.push_back(std::move(row));
}

DrivenEvolution direct_evolution(const DrivenModel& m, const DriveSpec& d, const CVector& psi0,
                                 const std::vector<double>& times, const OdeOptions& opts) {
  const Index n = m.dim();
  CMatrix w(n, n);
  OdeRhs f = [&](double t, const CVector& y, CVector& dy) {
    interaction_generator(m, d, t, w);
    dy.noalias() = cplx(0.0, -1.0) * (w * y);
  };
  DrivenEvolution out;
  out.times = times;
  out.labels = kTrackedLabels;
  const double t_end = times.empty() ? 0.0 : times.back();
  if (t_end <= 0.0) {
    for (std::size_t k = 0; k < times.size(); ++k) record(out, m, psi0);
    return out;
  }
  const Trajectory tr = integrate_ode(f, psi0, 0.0, t_end, times, opts);
  for (const auto& psi : tr.states) record(out, m, psi);
  return out;
}

DrivenEvolution stroboscopic_evolution(const DrivenModel& m, const DriveSpec& d, const CVector& psi0,
                                       const std::vector<double>& times, const OdeOptions& opts) {
  const Index n = m.dim();
  const double period = kTwoPi / d.omega_p;
  std::vector<long long> cycles(times.size());
  std::vector<double> rem(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double q = std::floor(times[k] / period);
    cycles[k] = static_cast<long long>(q);
    rem[k] = std::clamp(times[k] - q * period, 0.0, period);
  }
  std::vector<double> samples = rem;
  samples.push_back(period);
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

  CMatrix w(n, n);
  OdeRhs f = [&](double t, const CVector& y, CVector& dy) {
    interaction_generator(m, d, t, w);
    Eigen::Map<const CMatrix> u(y.data(), n, n);
    Eigen::Map<CMatrix> du(dy.data(), n, n);
    du.noalias() = cplx(0.0, -1.0) * (w * u);
  };
  CMatrix id = CMatrix::Identity(n, n);
  const CVector y0 = Eigen::Map<const CVector>(id.data(), n * n);
  const Trajectory tr = integrate_ode(f, y0, 0.0, period, samples, opts);

  auto lab_propagator = [&](std::size_t s) {
    CMatrix u = Eigen::Map<const CMatrix>(tr.states[s].data(), n, n);
    for (Index row = 0; row < n; ++row) u.row(row) *= std::polar(1.0, -m.energies[row] * tr.times[s]);
    return u;
  };
  const CMatrix u_period = nearest_unitary(lab_propagator(samples.size() - 1));

  std::vector<std::size_t> order(times.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cycles[a] < cycles[b]; });

  DrivenEvolution out;
  out.times = times;
  out.labels = kTrackedLabels;
  std::vector<CVector> states(times.size());
  CVector psi = psi0;
  long long at = 0;
  for (std::size_t k : order) {
    while (at < cycles[k]) {
      psi = u_period * psi;
      ++at;
    }
    const std::size_t s = static_cast<std::size_t>(std::lower_bound(samples.begin(), samples.end(), rem[k]) - samples.begin());
    states[k] = lab_propagator(s) * psi;
  }
  for (const auto& st : states) record(out, m, st);
  return out;
}

}  // namespace

CMatrix drive_hamiltonian(const DrivenModel& m, const DriveSpec& d, double t) {
  const auto c = coefficients(m, d, t);
  return c.cos_channel * m.cos_phi2 + c.sin_channel * m.sin_phi2;
}

DrivenEvolution evolve_driven(const DrivenModel& m, const DriveSpec& d, const std::string& psi0_label,
                              const std::vector<double>& times, Propagation how, const OdeOptions& opts) {
  d.validate();
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
    throw std::invalid_argument("evolve_driven: times must be sorted and non-negative");
  }
  CVector psi0 = CVector::Zero(m.dim());
  psi0[m.index(psi0_label)] = 1.0;
  if (d.amplitude == 0.0) {
    DrivenEvolution out;
    out.times = times;
    out.labels = kTrackedLabels;
    for (std::size_t k = 0; k < times.size(); ++k) record(out, m, psi0);
    return out;
  }
  const bool strobe = how == Propagation::stroboscopic || (how == Propagation::automatic && d.rise_time == 0.0);
  if (strobe && d.rise_time > 0.0) throw std::invalid_argument("evolve_driven: stroboscopic path needs a rectangular envelope");
  if (strobe) {
    OdeOptions tight = opts;
    tight.rtol = std::min(opts.rtol, 1e-11);
    tight.atol = std::min(opts.atol, 1e-13);
    return stroboscopic_evolution(m, d, psi0, times, tight);
  }
  return direct_evolution(m, d, psi0, times, opts);
}

ChevronGrid chevron_scan(const DrivenModel& m, double amplitude, const std::vector<double>& omega_p,
                         const std::vector<double>& times, int threads) {
  ChevronGrid g;
  g.omega_p = omega_p;
  g.times = times;
  g.amplitude = amplitude;
  g.p110.resize(omega_p.size());
  const Index target = 4;  // position of 110 in kTrackedLabels
  parallel_for(omega_p.size(), threads, [&](std::size_t k) {
    const DrivenEvolution ev = evolve_driven(m, DriveSpec{amplitude, omega_p[k], 0.0, 0.0}, "001", times);
    std::vector<double> col;
    col.reserve(times.size());
    for (const auto& row : ev.populations) col.push_back(row[static_cast<std::size_t>(target)]);
    g.p110[k] = std::move(col);
  });
  return g;
}

ColumnFit fit_rabi_column(const std::vector<double>& times, const std::vector<double>& p) {
  if (times.size() != p.size() || times.size() < 4) throw std::invalid_argument("fit_rabi_column: need at least four samples");
  const double t_max = times.back() - times.front();
  if (!(t_max > 0.0)) throw std::invalid_argument("fit_rabi_column: degenerate time grid");
  double dt_min = t_max;
  for (std::size_t k = 1; k < times.size(); ++k) dt_min = std::min(dt_min, times[k] - times[k - 1]);
  const double w_lo = 0.25 * kTwoPi / t_max;
  const double w_hi = kPi / dt_min;
  const std::size_t n_grid = 4000;

  auto linear_amp = [&](double w, double& sse) {
    double ff = 0.0, fp = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double s = std::sin(0.5 * w * times[k]);
      ff += s * s * s * s;
      fp += s * s * p[k];
    }
    const double a = ff > 0.0 ? fp / ff : 0.0;
    sse = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double s = std::sin(0.5 * w * times[k]);
      const double r = a * s * s - p[k];
      sse += r * r;
    }
    return a;
  };
  double best_w = w_lo, best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double w = w_lo + (w_hi - w_lo) * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    double sse = 0.0;
    linear_amp(w, sse);
    if (sse < best_sse) {
      best_sse = sse;
      best_w = w;
    }
  }
  double sse0 = 0.0;
  const double a0 = linear_amp(best_w, sse0);
  auto resid = [&](const RVector& x) {
    RVector r(static_cast<Index>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double s = std::sin(0.5 * x[1] * times[k]);
      r[static_cast<Index>(k)] = x[0] * s * s - p[k];
    }
    return r;
  };
  RVector x0(2), lo(2), hi(2), sc(2);
  x0 << a0, best_w;
  lo << -0.5, 0.5 * w_lo;
  hi << 2.0, 2.0 * w_hi;
  sc << 1.0, best_w;
  const LsqResult fit = levenberg_marquardt(resid, x0, lo, hi, sc);
  ColumnFit c;
  c.contrast = fit.x[0];
  c.omega_gen = fit.x[1];
  c.rms_residual = std::sqrt(2.0 * fit.cost / static_cast<double>(times.size()));
  return c;
}

ChevronFit extract_j_and_center(const ChevronGrid& grid) {
  if (grid.omega_p.size() < 3) throw std::invalid_argument("extract_j_and_center: need at least three frequencies");
  ChevronFit f;
  std::vector<double> contrast;
  for (const auto& col : grid.p110) {
    f.columns.push_back(fit_rabi_column(grid.times, col));
    contrast.push_back(f.columns.back().contrast);
    f.max_rms_residual = std::max(f.max_rms_residual, f.columns.back().rms_residual);
  }
  f.resonant_column = static_cast<std::size_t>(std::max_element(contrast.begin(), contrast.end()) - contrast.begin());
  const ParabolaVertex v = parabolic_peak(grid.omega_p, contrast);
  f.omega_3q = v.x;
  f.interior = v.interior;
  const ColumnFit& r = f.columns[f.resonant_column];
  f.j = std::sqrt(std::max(r.contrast, 0.0)) * r.omega_gen / 2.0;
  if (f.max_rms_residual > kColumnResidualLimit) {
    std::ostringstream os;
    os << "chevron column fit residual " << f.max_rms_residual << " above " << kColumnResidualLimit;
    throw std::runtime_error(os.str());
  }
  return f;
}

double perturbative_j(const DrivenModel& m, double amplitude) {
  const cplx s = m.sin_phi2(m.index("110"), m.index("001"));
  return 0.5 * kPi * m.params.dej * std::abs(s) * amplitude;
}

ShiftPrediction perturbative_shift(const DrivenModel& m, double amplitude) {
  const Index i110 = m.index("110"), i001 = m.index("001");
  const double w0 = m.omega_3q0();
  const double pref = kPi * kPi * amplitude * amplitude / 4.0;
  ShiftPrediction sp;
  sp.min_denominator = std::numeric_limits<double>::infinity();
  const double tiny = 1e-4 * std::abs(w0);
  std::vector<std::string> names(static_cast<std::size_t>(m.dim()));
  for (const auto& [lab, idx] : m.labels) names[static_cast<std::size_t>(idx)] = lab;

  auto state_sum = [&](Index a, Index resonant, double resonant_sign) {
    double acc = 0.0;
    for (Index l = 0; l < m.dim(); ++l) {
      const double w2 = std::norm(m.sin_phi2(l, a));
      for (double sign : {-1.0, 1.0}) {
        if (l == resonant && sign == resonant_sign) continue;
        const double den = m.energies[a] - (m.energies[l] + sign * w0);
        if (w2 == 0.0) continue;
        sp.min_denominator = std::min(sp.min_denominator, std::abs(den));
        if (std::abs(den) < tiny) {
          const std::string& nm = names[static_cast<std::size_t>(l)];
          sp.near_degenerate.push_back(nm.empty() ? "l=" + std::to_string(l) : nm);
          continue;
        }
        acc += w2 / den;
      }
    }
    return acc;
  };
  // The resonant pair itself carries the first-order coupling and is excluded.
  const double s110 = state_sum(i110, i001, +1.0);
  const double s001 = state_sum(i001, i110, -1.0);
  sp.sin_term = pref * m.params.dej * m.params.dej * (s110 - s001);
  sp.cos_term = pref * m.params.ej_sum * (m.cos_phi2(i110, i110).real() - m.cos_phi2(i001, i001).real());
  return sp;
}

double amplitude_for_j(const DrivenModel& m, double j) {
  const double per_unit = perturbative_j(m, 1.0);
  if (!(per_unit > 0.0)) throw std::runtime_error("amplitude_for_j: vanishing three-body matrix element");
  return j / per_unit;
}

CouplingPoint coupling_point(const DrivenModel& m, double amplitude, const ChevronSettings& s) {
  CouplingPoint cp;
  cp.amplitude = amplitude;
  cp.j_pert = perturbative_j(m, amplitude);
  const ShiftPrediction sp = perturbative_shift(m, amplitude);
  cp.shift_second_order = sp.total();
  cp.shift_cos_only = sp.cos_term;
  const double w0 = m.omega_3q0();
  const double half = s.span_in_j * cp.j_pert;
  const std::vector<double> times = linspace(0.0, s.rabi_periods * kPi / cp.j_pert, s.n_times);
  double centre = w0 + cp.shift_second_order;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const std::vector<double> omegas = linspace(centre - half, centre + half, s.n_omega);
    cp.grid = chevron_scan(m, amplitude, omegas, times, s.threads);
    cp.fit = extract_j_and_center(cp.grid);
    if (cp.fit.interior) break;
    centre = omegas[cp.fit.resonant_column];
  }
  if (!cp.fit.interior) throw std::runtime_error("coupling_point: resonance not bracketed by the chevron window");
  cp.j_brute = cp.fit.j;
  cp.omega_3q_brute = cp.fit.omega_3q;
  cp.shift_brute = cp.omega_3q_brute - w0;
  return cp;
}

}  // namespace lgtsim::drive
