#include "lgtsim/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lgtsim::circuit {
namespace {

// e^2 / (2 h * 1 fF) in GHz.
constexpr double kElementaryCharge = 1.602176634e-19;
constexpr double kPlanck = 6.62607015e-34;
const double kEcGhzFemtofarad = kElementaryCharge * kElementaryCharge / (2.0 * kPlanck * 1e-15) * 1e-9;

CMatrix identity(Index n) { return CMatrix::Identity(n, n); }

std::string label_string(int a, int b, int c) {
  std::string s;
  s.push_back(static_cast<char>('0' + a));
  s.push_back(static_cast<char>('0' + b));
  s.push_back(static_cast<char>('0' + c));
  return s;
}

struct LocalTransmon {
  RVector energies;
  CMatrix n, cos_phi, sin_phi;  // kept eigenbasis
  double edge_weight = 0.0;
};

LocalTransmon diagonalize_local(const TransmonBasis& b, double ec, double ej_cos, double ej_sin) {
  const CMatrix h = transmon_hamiltonian(b.charge_cutoff, ec, ej_cos, ej_sin);
  const EigenSystem es = eigh(h);
  const Index k = b.levels_kept;
  const CMatrix v = es.vectors.leftCols(k);
  LocalTransmon t;
  t.energies = es.values.head(k);
  t.n = v.adjoint() * charge_operator(b.charge_cutoff) * v;
  t.cos_phi = v.adjoint() * cos_phi_operator(b.charge_cutoff) * v;
  t.sin_phi = v.adjoint() * sin_phi_operator(b.charge_cutoff) * v;
  const Index last = es.vectors.rows() - 1;
  t.edge_weight = std::max(std::norm(es.vectors(0, 0)), std::norm(es.vectors(last, 0)));
  return t;
}

}  // namespace

void CircuitParams::validate() const {
  if ((ec - ec.transpose()).cwiseAbs().maxCoeff() > 1e-12 * ec.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("CircuitParams: E_C matrix must be symmetric");
  }
  for (int j = 0; j < 3; ++j) {
    if (!(ec(j, j) > 0.0)) throw std::invalid_argument("CircuitParams: diagonal E_C must be positive");
  }
  if (!(ej1 > 0.0 && ej3 > 0.0 && ej_sum > 0.0)) throw std::invalid_argument("CircuitParams: E_J must be positive");
  if (!(std::abs(dej) < ej_sum)) throw std::invalid_argument("CircuitParams: |dE_J| must be below E_J");
}

void TransmonBasis::validate() const {
  if (charge_cutoff < 10) throw std::invalid_argument("TransmonBasis: charge cutoff must be at least 10");
  if (levels_kept < 4 || levels_kept > 10) throw std::invalid_argument("TransmonBasis: levels_kept must be in [4, 10]");
  if (levels_kept > 2 * charge_cutoff + 1) throw std::invalid_argument("TransmonBasis: more levels than charge states");
}

Matrix3 charging_matrix_from_capacitances(double c1, double c2, double c3, double c12, double c13, double c23) {
  if (!(c1 > 0 && c2 > 0 && c3 > 0)) throw std::invalid_argument("capacitances must be positive");
  if (c12 < 0 || c13 < 0 || c23 < 0) throw std::invalid_argument("coupling capacitances must be non-negative");
  Matrix3 m;
  m << c1 + c12 + c13, -c12, -c13,
      -c12, c2 + c12 + c23, -c23,
      -c13, -c23, c3 + c13 + c23;
  const double det = m.determinant();
  if (!(std::abs(det) > 1e-14 * std::pow(m.cwiseAbs().maxCoeff(), 3))) {
    throw std::invalid_argument("capacitance matrix is singular");
  }
  Matrix3 ec = ghz(kEcGhzFemtofarad) * m.inverse();
  return 0.5 * (ec + ec.transpose());
}

double ec_offdiag_from_g(double g, double ec_jj, double ec_kk, double ej_j, double ej_k) {
  return g / (2.0 * std::pow(ej_j * ej_k / (4.0 * ec_jj * ec_kk), 0.25));
}

PerturbativeCouplings perturbative_couplings(const CircuitParams& p) {
  const auto ej = p.ej();
  PerturbativeCouplings c;
  for (int j = 0; j < 3; ++j) c.omega0[static_cast<std::size_t>(j)] = std::sqrt(8.0 * p.ec(j, j) * ej[static_cast<std::size_t>(j)]) - p.ec(j, j);
  auto g = [&](int j, int k) {
    return 2.0 * p.ec(j, k) * std::pow(ej[static_cast<std::size_t>(j)] * ej[static_cast<std::size_t>(k)] / (4.0 * p.ec(j, j) * p.ec(k, k)), 0.25);
  };
  c.g12 = g(0, 1);
  c.g13 = g(0, 2);
  c.g23 = g(1, 2);
  return c;
}

CMatrix charge_operator(int nc) {
  const Index d = 2 * nc + 1;
  CMatrix n = CMatrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k - nc);
  return n;
}

CMatrix cos_phi_operator(int nc) {
  const Index d = 2 * nc + 1;
  CMatrix c = CMatrix::Zero(d, d);
  for (Index k = 0; k + 1 < d; ++k) {
    c(k + 1, k) = 0.5;
    c(k, k + 1) = 0.5;
  }
  return c;
}

CMatrix sin_phi_operator(int nc) {
  // e^{i phi}|n> = |n+1>, sin = (e^{i phi} - e^{-i phi}) / 2i.
  const Index d = 2 * nc + 1;
  CMatrix s = CMatrix::Zero(d, d);
  for (Index k = 0; k + 1 < d; ++k) {
    s(k + 1, k) = cplx(0.0, -0.5);
    s(k, k + 1) = cplx(0.0, 0.5);
  }
  return s;
}

CMatrix transmon_hamiltonian(int nc, double ec, double ej_cos, double ej_sin) {
  CMatrix n = charge_operator(nc);
  return 4.0 * ec * n * n - ej_cos * cos_phi_operator(nc) - ej_sin * sin_phi_operator(nc);
}

Index StaticModel::product_index(int n1, int n2, int n3) const {
  const Index k = basis.levels_kept;
  if (n1 < 0 || n2 < 0 || n3 < 0 || n1 >= k || n2 >= k || n3 >= k) throw std::out_of_range("product_index out of range");
  return (static_cast<Index>(n1) * k + n2) * k + n3;
}

StaticModel build_static_model(const CircuitParams& p, const TransmonBasis& basis) {
  p.validate();
  basis.validate();
  const double x = kPi * p.flux_bias;
  const std::array<LocalTransmon, 3> t = {
      diagonalize_local(basis, p.ec(0, 0), p.ej1, 0.0),
      diagonalize_local(basis, p.ec(1, 1), p.ej_sum * std::cos(x), p.dej * std::sin(x)),
      diagonalize_local(basis, p.ec(2, 2), p.ej3, 0.0),
  };
  StaticModel m;
  m.basis = basis;
  const Index k = basis.levels_kept;
  const CMatrix id = identity(k);
  std::array<CMatrix, 3> h_loc;
  for (int j = 0; j < 3; ++j) {
    const auto& tj = t[static_cast<std::size_t>(j)];
    h_loc[static_cast<std::size_t>(j)] = tj.energies.cast<cplx>().asDiagonal();
    m.local_energies[static_cast<std::size_t>(j)] = tj.energies;
    m.max_edge_weight = std::max(m.max_edge_weight, tj.edge_weight);
  }
  if (m.max_edge_weight > kEdgeWeightLimit) {
    std::ostringstream os;
    os << "charge cutoff " << basis.charge_cutoff << " too small: ground-state weight " << m.max_edge_weight
       << " at the truncation edge";
    throw CutoffError(os.str());
  }
  m.hamiltonian = kron_all({h_loc[0], id, id}) + kron_all({id, h_loc[1], id}) + kron_all({id, id, h_loc[2]});
  m.hamiltonian += 8.0 * p.ec(0, 1) * kron_all({t[0].n, t[1].n, id});
  m.hamiltonian += 8.0 * p.ec(0, 2) * kron_all({t[0].n, id, t[2].n});
  m.hamiltonian += 8.0 * p.ec(1, 2) * kron_all({id, t[1].n, t[2].n});
  m.hamiltonian = 0.5 * (m.hamiltonian + m.hamiltonian.adjoint()).eval();
  m.cos_phi2 = kron_all({id, t[1].cos_phi, id});
  m.sin_phi2 = kron_all({id, t[1].sin_phi, id});
  return m;
}

LinearOperator build_static_hamiltonian(const CircuitParams& p, const TransmonBasis& basis) {
  return LinearOperator(build_static_model(p, basis).hamiltonian);
}

Index DressedSpectrum::index(const std::string& label) const {
  auto it = labels.find(label);
  if (it != labels.end()) return it->second;
  // Report the eigenstates carrying the largest weight of the requested product state.
  std::ostringstream os;
  os << "no dressed state with overlap above " << kLabelThreshold << " for |" << label << ">";
  if (label.size() == 3 && std::all_of(label.begin(), label.end(), [&](char c) { return c >= '0' && c - '0' < model.levels(); })) {
    const Index b = model.product_index(label[0] - '0', label[1] - '0', label[2] - '0');
    std::vector<std::pair<double, Index>> w;
    for (Index l = 0; l < states.cols(); ++l) w.emplace_back(std::norm(states(b, l)), l);
    std::sort(w.rbegin(), w.rend());
    os << "; candidates:";
    for (std::size_t k = 0; k < std::min<std::size_t>(3, w.size()); ++k) {
      os << " l=" << w[k].second << " (" << w[k].first << ")";
    }
  }
  throw LabelingError(os.str());
}

double DressedSpectrum::cross_kerr_12() const {
  return energy("110") - energy("100") - energy("010") + energy("000");
}

DressedSpectrum dressed_spectrum(const CircuitParams& p, const TransmonBasis& basis) {
  DressedSpectrum s;
  s.model = build_static_model(p, basis);
  EigenSystem es = eigh(s.model.hamiltonian);
  s.energies = std::move(es.values);
  s.states = std::move(es.vectors);
  const Index k = basis.levels_kept;
  s.label_of.assign(static_cast<std::size_t>(s.states.cols()), std::string());
  for (Index l = 0; l < s.states.cols(); ++l) {
    Index b = 0;
    const double w = s.states.col(l).cwiseAbs2().maxCoeff(&b);
    // Weight above one half makes the assignment injective.
    if (w > kLabelThreshold) {
      const int n1 = static_cast<int>(b / (k * k)), n2 = static_cast<int>((b / k) % k), n3 = static_cast<int>(b % k);
      const std::string lab = label_string(n1, n2, n3);
      s.labels.emplace(lab, l);
      s.label_of[static_cast<std::size_t>(l)] = lab;
    }
  }
  return s;
}

std::array<double, 3> dressed_qubit_frequencies(const DressedSpectrum& s) {
  const double e0 = s.energy("000");
  return {s.energy("100") - e0, s.energy("010") - e0, s.energy("001") - e0};
}

namespace {

void refresh_offdiag(CircuitParams& p, const CalibrationTargets& t) {
  const auto ej = p.ej();
  auto set = [&](int j, int k, double g) {
    p.ec(j, k) = p.ec(k, j) = ec_offdiag_from_g(g, p.ec(j, j), p.ec(k, k), ej[static_cast<std::size_t>(j)], ej[static_cast<std::size_t>(k)]);
  };
  set(0, 1, t.g12);
  set(0, 2, t.g13);
  set(1, 2, t.g23);
}

template <class Refresh>
CalibrationResult run_calibration(const std::array<double, 3>& omega, CircuitParams p, const TransmonBasis& basis,
                                  double tol, int max_iterations, Refresh refresh) {
  const double d = p.ej_sum > 0.0 ? p.dej / p.ej_sum : kDefaultSquidAsymmetry;
  std::array<double, 3> ej{};
  for (int j = 0; j < 3; ++j) {
    const double ec = p.ec(j, j);
    ej[static_cast<std::size_t>(j)] = std::pow(omega[static_cast<std::size_t>(j)] + ec, 2) / (8.0 * ec);
  }
  CalibrationResult res;
  for (res.iterations = 1; res.iterations <= max_iterations; ++res.iterations) {
    p.ej1 = ej[0];
    p.ej_sum = ej[1];
    p.dej = d * ej[1];
    p.ej3 = ej[2];
    refresh(p);
    const DressedSpectrum s = dressed_spectrum(p, basis);
    res.dressed = dressed_qubit_frequencies(s);
    res.max_error = 0.0;
    for (std::size_t j = 0; j < 3; ++j) res.max_error = std::max(res.max_error, std::abs(res.dressed[j] - omega[j]));
    if (res.max_error < tol) {
      res.params = p;
      return res;
    }
    for (std::size_t j = 0; j < 3; ++j) {
      const double ec = p.ec(static_cast<Index>(j), static_cast<Index>(j));
      ej[j] *= std::pow((omega[j] + ec) / (res.dressed[j] + ec), 2);
    }
  }
  std::ostringstream os;
  os << "calibrate_ej did not converge in " << max_iterations << " iterations (max error " << to_mhz(res.max_error)
     << " MHz)";
  throw std::runtime_error(os.str());
}

}  // namespace

CalibrationResult calibrate_ej(const CalibrationTargets& t, const TransmonBasis& basis, double tolerance,
                               int max_iterations) {
  CircuitParams p;
  for (int j = 0; j < 3; ++j) p.ec(j, j) = t.ec_diag[static_cast<std::size_t>(j)];
  p.ej_sum = 1.0;
  p.dej = t.squid_asymmetry;
  return run_calibration(t.omega, p, basis, tolerance, max_iterations,
                         [&](CircuitParams& q) { refresh_offdiag(q, t); });
}

CalibrationResult calibrate_ej(const std::array<double, 3>& omega, const CircuitParams& p0, const TransmonBasis& basis,
                               double tolerance, int max_iterations) {
  return run_calibration(omega, p0, basis, tolerance, max_iterations, [](CircuitParams&) {});
}

std::vector<FluxPoint> spectrum_vs_flux(const CircuitParams& p, const std::vector<double>& flux_bias,
                                        const TransmonBasis& basis) {
  std::vector<FluxPoint> out;
  out.reserve(flux_bias.size());
  for (double phi : flux_bias) {
    if (phi < -0.5 || phi > 0.5) throw std::invalid_argument("spectrum_vs_flux: bias must lie in [-1/2, 1/2]");
    CircuitParams q = p;
    q.flux_bias = phi;
    const StaticModel m = build_static_model(q, basis);
    const EigenSystem es = eigh(m.hamiltonian);
    const std::array<Index, 3> bare = {m.product_index(1, 0, 0), m.product_index(0, 1, 0), m.product_index(0, 0, 1)};
    const Index g = m.product_index(0, 0, 0);
    Index ground = 0;
    es.vectors.row(g).cwiseAbs2().maxCoeff(&ground);

    std::vector<std::pair<double, Index>> single;
    for (Index l = 0; l < es.vectors.cols(); ++l) {
      double w = 0.0;
      for (Index b : bare) w += std::norm(es.vectors(b, l));
      single.emplace_back(w, l);
    }
    std::partial_sort(single.begin(), single.begin() + 3, single.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    std::array<Index, 3> cand = {single[0].second, single[1].second, single[2].second};
    std::array<int, 3> perm = {0, 1, 2}, best = perm;
    double best_w = -1.0;
    do {
      double w = 0.0;
      for (int j = 0; j < 3; ++j) w += std::norm(es.vectors(bare[static_cast<std::size_t>(j)], cand[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])]));
      if (w > best_w + 1e-15) {
        best_w = w;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    FluxPoint fp{phi, {}, {}};
    for (std::size_t j = 0; j < 3; ++j) {
      const Index l = cand[static_cast<std::size_t>(best[j])];
      fp.omega[j] = es.values[l] - es.values[ground];
      fp.bare_weight[j] = std::norm(es.vectors(bare[j], l));
    }
    out.push_back(fp);
  }
  return out;
}

SquidMatrixElements squid_matrix_elements(const DressedSpectrum& s, Index n_levels) {
  const Index m = n_levels < 0 ? s.states.cols() : std::min(n_levels, s.states.cols());
  const CMatrix v = s.states.leftCols(m);
  return {v.adjoint() * s.model.sin_phi2 * v, v.adjoint() * s.model.cos_phi2 * v};
}

std::vector<TransitionEntry> transition_table(const DressedSpectrum& s) {
  std::vector<TransitionEntry> t;
  const std::vector<std::pair<std::string, std::vector<std::string>>> rows = {
      {"200", {"000", "100"}},
      {"110", {"000", "100", "010", "001"}},
      {"020", {"000", "010"}},
  };
  for (const auto& [to, sources] : rows) {
    for (const auto& from : sources) {
      double w = s.transition(from, to);
      // Two-photon transitions from the ground state are driven at half the energy.
      if (from == "000") w *= 0.5;
      t.push_back({from, to, w});
    }
  }
  return t;
}

CalibrationTargets reference_device_targets() {
  CalibrationTargets t;
  t.omega = {ghz(5.7279), ghz(5.9098), ghz(5.0538)};
  t.ec_diag = {mhz(183.0), mhz(165.0), mhz(184.0)};
  t.g12 = mhz(63.0);
  t.g13 = mhz(18.0);
  t.g23 = mhz(108.0);
  t.squid_asymmetry = kDefaultSquidAsymmetry;
  return t;
}

}  // namespace lgtsim::circuit
