#include "lgtsim/chain.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lgtsim::chain {

namespace {

void require_bits(const std::string& ket) {
  for (char c : ket)
    if (c != '0' && c != '1') throw std::invalid_argument("chain: ket must contain only 0 and 1: " + ket);
}

void require_four(const ChainSpec& spec, const char* where) {
  spec.validate();
  if (spec.n_matter != 4) throw std::invalid_argument(std::string(where) + ": requires n_matter = 4");
}

}  // namespace

void ChainSpec::validate() const {
  if (n_matter < 2) throw std::invalid_argument("ChainSpec: n_matter must be >= 2");
  const auto n = static_cast<std::size_t>(n_transmons());
  if (omega.size() != n) throw std::invalid_argument("ChainSpec: omega needs one entry per transmon");
  if (chi.size() != n - 1) throw std::invalid_argument("ChainSpec: chi needs one entry per adjacent pair");
  for (double v : omega)
    if (!std::isfinite(v)) throw std::invalid_argument("ChainSpec: non-finite omega");
  for (double v : chi)
    if (!std::isfinite(v)) throw std::invalid_argument("ChainSpec: non-finite chi");
}

double ket_energy(const ChainSpec& spec, const std::string& ket) {
  spec.validate();
  require_bits(ket);
  if (ket.size() != spec.omega.size()) throw std::invalid_argument("ket_energy: ket length does not match chain");
  double e = 0.0;
  for (std::size_t i = 0; i < ket.size(); ++i) {
    if (ket[i] != '1') continue;
    e += spec.omega[i];
    if (i + 1 < ket.size() && ket[i + 1] == '1') e += spec.chi[i];
  }
  return e;
}

std::string energy_expression(const std::string& ket) {
  require_bits(ket);
  std::ostringstream out;
  bool first = true;
  auto term = [&](const std::string& t) {
    out << (first ? "" : " + ") << t;
    first = false;
  };
  for (std::size_t i = 0; i < ket.size(); ++i)
    if (ket[i] == '1') term("w" + std::to_string(i + 1));
  for (std::size_t i = 0; i + 1 < ket.size(); ++i)
    if (ket[i] == '1' && ket[i + 1] == '1') term("chi" + std::to_string(i + 1) + std::to_string(i + 2));
  return first ? "0" : out.str();
}

qlm::GaugeSector chain_sector(int n_matter) {
  qlm::LatticeSpec lat;
  lat.n_sites = n_matter;
  return qlm::enumerate_gauge_sector(lat);
}

std::vector<GaugeState> gauge_states_and_energies(const ChainSpec& spec) {
  require_four(spec, "gauge_states_and_energies");
  const auto sector = chain_sector(4);
  if (sector.dim() != 5) throw std::logic_error("gauge_states_and_energies: expected five gauge-invariant states");
  std::vector<GaugeState> out;
  for (Index k = 0; k < sector.dim(); ++k) {
    GaugeState g;
    g.name = kStateNames[static_cast<std::size_t>(k)];
    g.ket = sector.states[static_cast<std::size_t>(k)].ket();
    g.energy = ket_energy(spec, g.ket);
    g.expression = energy_expression(g.ket);
    out.push_back(g);
  }
  return out;
}

std::vector<Coupling> coupling_pairs(const std::vector<std::string>& kets) {
  std::vector<Coupling> out;
  if (kets.empty()) return out;
  const std::size_t len = kets.front().size();
  for (const auto& k : kets) {
    require_bits(k);
    if (k.size() != len || len % 2 == 0) throw std::invalid_argument("coupling_pairs: kets must share an odd length");
  }
  const int links = static_cast<int>(len / 2);
  for (int n = 1; n <= links; ++n) {
    const std::size_t p = static_cast<std::size_t>(2 * n - 2);  // m_n, l_n, m_{n+1}
    for (std::size_t a = 0; a < kets.size(); ++a) {
      if (kets[a].compare(p, 3, "001") != 0) continue;
      std::string target = kets[a];
      target.replace(p, 3, "110");
      for (std::size_t b = 0; b < kets.size(); ++b)
        if (kets[b] == target) out.push_back({n, static_cast<int>(a), static_cast<int>(b)});
    }
  }
  return out;
}

ResonanceFrequencies resonance_frequencies(const ChainSpec& spec) {
  require_four(spec, "resonance_frequencies");
  const auto& w = spec.omega;
  const auto& c = spec.chi;  // c[0] = chi12, c[2] = chi34, ...
  ResonanceFrequencies r;
  r.closed_form = {w[0] + w[1] - w[2] + c[0] - c[2], w[2] + w[3] - w[4] + c[2], w[4] + w[5] - w[6] + c[3] + c[4]};
  const auto st = gauge_states_and_energies(spec);
  const auto e = [&](int k) { return st[static_cast<std::size_t>(k)].energy; };
  r.route_a = {e(3) - e(1), e(1) - e(0), e(2) - e(1)};
  r.route_b = {e(4) - e(2), e(1) - e(0), e(4) - e(3)};
  return r;
}

Detunings detunings_from_masses(const TargetMasses& m) {
  const auto& mu = m.mu;
  return {-mu[0] - mu[1], mu[1] + mu[2], -mu[2] - mu[3]};
}

TargetMasses masses_from_detunings(const Detunings& delta, int pin_index, double pin_value) {
  if (pin_index < 1 || pin_index > 4) throw std::invalid_argument("masses_from_detunings: pin_index must be 1..4");
  Eigen::Matrix4d a;
  a << -1, -1, 0, 0,
        0, 1, 1, 0,
        0, 0, -1, -1,
        0, 0, 0, 0;
  a(3, pin_index - 1) = 1.0;
  const Eigen::Vector4d rhs(delta[0], delta[1], delta[2], pin_value);
  const Eigen::Vector4d mu = a.fullPivLu().solve(rhs);
  TargetMasses out;
  for (int i = 0; i < 4; ++i) out.mu[static_cast<std::size_t>(i)] = mu[i];
  return out;
}

double staggered_mass_energy(const TargetMasses& mu, const std::string& ket) {
  require_bits(ket);
  if (ket.size() != 7) throw std::invalid_argument("staggered_mass_energy: expects a 7-transmon ket");
  double e = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const int sz = ket[static_cast<std::size_t>(2 * n - 2)] == '1' ? -1 : 1;
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    e += 0.5 * sign * mu.mu[static_cast<std::size_t>(n - 1)] * sz;
  }
  return e;
}

FrameReport verify_rotating_frame(const ChainSpec& spec, const TargetMasses& mu, const Detunings& delta,
                                  const std::array<double, 3>& j,
                                  const std::optional<std::array<double, 5>>& reference_energies, double tol) {
  const auto states = gauge_states_and_energies(spec);
  const auto w3q = resonance_frequencies(spec).closed_form;
  FrameReport rep;
  for (std::size_t k = 0; k < 5; ++k) {
    rep.target_diagonal[k] = staggered_mass_energy(mu, states[k].ket);
    rep.reference_energies[k] =
        reference_energies ? (*reference_energies)[k] : states[k].energy - rep.target_diagonal[k];
    rep.diagonal[k] = states[k].energy - rep.reference_energies[k];
    const double err = std::abs(rep.diagonal[k] - rep.target_diagonal[k]);
    rep.max_diagonal_error = std::max(rep.max_diagonal_error, err);
    if (err > tol) {
      std::ostringstream msg;
      msg << "diagonal " << states[k].name << ": " << rep.diagonal[k] << " differs from the staggered mass "
          << rep.target_diagonal[k];
      rep.violations.push_back(msg.str());
    }
  }

  std::vector<std::string> kets;
  for (const auto& s : states) kets.push_back(s.ket);
  rep.hamiltonian = CMatrix::Zero(5, 5);
  for (std::size_t k = 0; k < 5; ++k) rep.hamiltonian(static_cast<Index>(k), static_cast<Index>(k)) = rep.diagonal[k];
  for (const auto& c : coupling_pairs(kets)) {
    const auto l = static_cast<std::size_t>(c.link - 1);
    FrameElement el;
    el.row = c.a;
    el.col = c.b;
    el.link = c.link;
    el.label = kStateNames[static_cast<std::size_t>(c.a)] + "-" + kStateNames[static_cast<std::size_t>(c.b)];
    el.j = j[l];
    el.time_coefficient = w3q[l] + delta[l] -
                          (rep.reference_energies[static_cast<std::size_t>(c.b)] -
                           rep.reference_energies[static_cast<std::size_t>(c.a)]);
    rep.hamiltonian(c.a, c.b) = -el.j;
    rep.hamiltonian(c.b, c.a) = -el.j;
    rep.max_time_coefficient = std::max(rep.max_time_coefficient, std::abs(el.time_coefficient));
    if (std::abs(el.time_coefficient) > tol) {
      std::ostringstream msg;
      msg << "element " << el.label << " (link " << el.link << ") keeps time dependence " << el.time_coefficient;
      rep.violations.push_back(msg.str());
    }
    rep.elements.push_back(el);
  }
  rep.ok = rep.violations.empty();
  return rep;
}

}  // namespace lgtsim::chain
