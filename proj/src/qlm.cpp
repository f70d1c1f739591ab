#include "lgtsim/qlm.hpp"

#include "lgtsim/ode.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace lgtsim::qlm {
namespace {

constexpr int kMaxSites = 16;

int stagger(int n) { return (n % 2 == 0) ? 1 : -1; }  // (-1)^n

void check_site(const ChainConfig& c, int n) {
  if (n < 1 || n > static_cast<int>(c.matter.size())) throw std::out_of_range("site index out of range");
}

void check_link(const ChainConfig& c, int k) {
  if (k < 1 || k > static_cast<int>(c.links.size())) throw std::out_of_range("link index out of range");
}

void check_shape(const LatticeSpec& lat, const ChainConfig& c) {
  if (static_cast<int>(c.matter.size()) != lat.n_sites || static_cast<int>(c.links.size()) != lat.n_links()) {
    throw std::invalid_argument("configuration does not match lattice");
  }
}

std::uint8_t bit_of_tau(int tau) { return tau == -1 ? 1 : 0; }

}  // namespace

void LatticeSpec::validate() const {
  if (n_sites < 2) throw std::invalid_argument("LatticeSpec: at least two matter sites required");
  if (n_sites > kMaxSites) throw std::invalid_argument("LatticeSpec: at most 16 matter sites supported");
  if (std::abs(boundary_left) != 1 || std::abs(boundary_right) != 1) {
    throw std::invalid_argument("LatticeSpec: boundary fields must be +1 or -1");
  }
}

std::string ChainConfig::ket() const {
  std::string s;
  for (std::size_t n = 0; n < matter.size(); ++n) {
    s.push_back(matter[n] ? '1' : '0');
    if (n < links.size()) s.push_back(links[n] ? '1' : '0');
  }
  return s;
}

ChainConfig ChainConfig::from_ket(const std::string& ket) {
  if (ket.size() < 3 || ket.size() % 2 == 0) throw std::invalid_argument("ket must have odd length >= 3");
  ChainConfig c;
  for (std::size_t k = 0; k < ket.size(); ++k) {
    if (ket[k] != '0' && ket[k] != '1') throw std::invalid_argument("ket must contain only 0 and 1");
    const std::uint8_t b = ket[k] == '1';
    if (k % 2 == 0) c.matter.push_back(b);
    else c.links.push_back(b);
  }
  return c;
}

std::uint64_t ChainConfig::key() const {
  std::uint64_t k = 0;
  for (std::size_t n = 0; n < matter.size(); ++n) {
    k = (k << 1) | matter[n];
    if (n < links.size()) k = (k << 1) | links[n];
  }
  return k;
}

std::optional<Index> GaugeSector::find(const ChainConfig& c) const {
  auto it = index_of.find(c.key());
  if (it == index_of.end() || states[static_cast<std::size_t>(it->second)] != c) return std::nullopt;
  return it->second;
}

CVector GaugeSector::basis_state(const ChainConfig& c) const {
  auto idx = find(c);
  if (!idx) throw std::invalid_argument("configuration " + c.ket() + " is not in the gauge sector");
  CVector v = CVector::Zero(dim());
  v[*idx] = 1.0;
  return v;
}

double gauss_eigenvalue(const LatticeSpec& lat, const ChainConfig& c, int n) {
  check_shape(lat, c);
  if (n < 1 || n > lat.n_sites) throw std::out_of_range("gauss_eigenvalue: site index out of range");
  const int sz = spin_z(c.matter[static_cast<std::size_t>(n - 1)]);
  const int tau_right = (n == lat.n_sites) ? lat.boundary_right : spin_z(c.links[static_cast<std::size_t>(n - 1)]);
  const int tau_left = (n == 1) ? lat.boundary_left : spin_z(c.links[static_cast<std::size_t>(n - 2)]);
  return 0.5 * (sz - stagger(n)) - 0.5 * (tau_right - tau_left);
}

bool satisfies_gauss_law(const LatticeSpec& lat, const ChainConfig& c) {
  for (int n = 1; n <= lat.n_sites; ++n) {
    if (gauss_eigenvalue(lat, c, n) != 0.0) return false;
  }
  return true;
}

GaugeSector enumerate_gauge_sector(const LatticeSpec& lat) {
  lat.validate();
  GaugeSector sector;
  sector.lattice = lat;
  const int L = lat.n_sites;
  ChainConfig c;
  c.matter.assign(static_cast<std::size_t>(L), 0);
  c.links.assign(static_cast<std::size_t>(L - 1), 0);

  // Gauss's law at site n fixes tau_{n,n+1} from sigma_n and tau_{n-1,n}, so a
  // depth-first walk over the matter bits (0 before 1) visits the sector in
  // lexicographic order of the interleaved pattern.
  std::function<void(int, int)> walk = [&](int n, int tau_left) {
    for (std::uint8_t m : {std::uint8_t{0}, std::uint8_t{1}}) {
      const int sz = spin_z(m);
      const int tau_right = tau_left + sz - stagger(n);
      c.matter[static_cast<std::size_t>(n - 1)] = m;
      if (n == L) {
        if (tau_right == lat.boundary_right) {
          sector.index_of.emplace(c.key(), sector.dim());
          sector.states.push_back(c);
        }
        continue;
      }
      if (tau_right != 1 && tau_right != -1) continue;
      c.links[static_cast<std::size_t>(n - 1)] = bit_of_tau(tau_right);
      walk(n + 1, tau_right);
    }
  };
  walk(1, lat.boundary_left);
  return sector;
}

LinearOperator build_qlm_hamiltonian(const GaugeSector& sector, const QlmParams& p) {
  return build_qlm_hamiltonian(sector, std::vector<double>(static_cast<std::size_t>(sector.lattice.n_sites), p.mu),
                               p.j);
}

LinearOperator build_qlm_hamiltonian(const GaugeSector& sector, const std::vector<double>& mu_sites, double j) {
  if (sector.dim() == 0) throw std::invalid_argument("build_qlm_hamiltonian: empty sector");
  const int L = sector.lattice.n_sites;
  if (static_cast<int>(mu_sites.size()) != L) throw std::invalid_argument("build_qlm_hamiltonian: one mass per site");
  CooBuilder b(sector.dim(), sector.dim());
  for (Index row = 0; row < sector.dim(); ++row) {
    const ChainConfig& c = sector.states[static_cast<std::size_t>(row)];
    double diag = 0.0;
    for (int n = 1; n <= L; ++n) diag += 0.5 * stagger(n) * mu_sites[static_cast<std::size_t>(n - 1)] * spin_z(c.matter[static_cast<std::size_t>(n - 1)]);
    b.add(row, row, diag);
    // sigma^+_n tau^+_{n,n+1} sigma^-_{n+1} maps (1,1,0) -> (0,0,1); its conjugate the reverse.
    for (int n = 1; n < L; ++n) {
      const std::size_t s = static_cast<std::size_t>(n - 1);
      const std::uint8_t a = c.matter[s], l = c.links[s], d = c.matter[s + 1];
      const bool forward = a == 1 && l == 1 && d == 0;
      const bool backward = a == 0 && l == 0 && d == 1;
      if (!forward && !backward) continue;
      ChainConfig t = c;
      t.matter[s] = forward ? 0 : 1;
      t.links[s] = forward ? 0 : 1;
      t.matter[s + 1] = forward ? 1 : 0;
      auto col = sector.find(t);
      if (!col) throw std::logic_error("hopping left the gauge sector");
      b.add(row, *col, -j);
    }
  }
  return b.finalize();
}

double particle_number(const ChainConfig& c, int n) {
  check_site(c, n);
  return 0.5 * (1 - spin_z(c.matter[static_cast<std::size_t>(n - 1)]));
}

double electric_field(const ChainConfig& c, int link) {
  check_link(c, link);
  return -spin_z(c.links[static_cast<std::size_t>(link - 1)]);
}

namespace {
template <class F>
double diagonal_expectation(const GaugeSector& s, const CVector& psi, F value) {
  if (psi.size() != s.dim()) throw std::invalid_argument("state dimension does not match sector");
  double acc = 0.0;
  for (Index i = 0; i < s.dim(); ++i) acc += std::norm(psi[i]) * value(s.states[static_cast<std::size_t>(i)]);
  return acc;
}
}  // namespace

double particle_number(const GaugeSector& s, const CVector& psi, int n) {
  return diagonal_expectation(s, psi, [n](const ChainConfig& c) { return particle_number(c, n); });
}

double electric_field(const GaugeSector& s, const CVector& psi, int link) {
  return diagonal_expectation(s, psi, [link](const ChainConfig& c) { return electric_field(c, link); });
}

double gauss_expectation(const GaugeSector& s, const CVector& psi, int n) {
  return diagonal_expectation(s, psi, [&](const ChainConfig& c) { return gauss_eigenvalue(s.lattice, c, n); });
}

std::vector<CVector> evolve(const GaugeSector& sector, const LinearOperator& h, const CVector& psi0,
                            const std::vector<double>& times) {
  if (h.rows() != sector.dim() || psi0.size() != sector.dim()) {
    throw std::invalid_argument("evolve: dimension mismatch");
  }
  const SpectralPropagator prop(h.to_dense());
  std::vector<CVector> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(t == 0.0 ? psi0 : prop.apply(psi0, t));
  return out;
}

ChainConfig symmetry_transform(const LatticeSpec& lat, const ChainConfig& c, Symmetry kind) {
  check_shape(lat, c);
  const std::size_t L = static_cast<std::size_t>(lat.n_sites);
  ChainConfig out = c;
  if (kind == Symmetry::parity) {
    for (std::size_t n = 0; n < L; ++n) out.matter[n] = c.matter[L - 1 - n];
    for (std::size_t k = 0; k + 1 < L; ++k) out.links[k] = 1 - c.links[L - 2 - k];
    return out;
  }
  out.matter[0] = 1 - c.matter[L - 1];
  for (std::size_t n = 1; n < L; ++n) out.matter[n] = 1 - c.matter[n - 1];
  out.links[0] = 1 - bit_of_tau(lat.boundary_left);
  for (std::size_t k = 1; k + 1 < L; ++k) out.links[k] = 1 - c.links[k - 1];
  return out;
}

LatticeSpec transformed_lattice(const LatticeSpec& lat, Symmetry kind) {
  if (kind == Symmetry::parity) return {lat.n_sites, -lat.boundary_right, -lat.boundary_left};
  return lat;
}

ChainConfig false_vacuum_right(int n_sites) {
  ChainConfig c;
  for (int n = 1; n <= n_sites; ++n) c.matter.push_back(n % 2 == 1);
  c.links.assign(static_cast<std::size_t>(n_sites - 1), 1);
  return c;
}

ChainConfig false_vacuum_left(int n_sites) {
  ChainConfig c = false_vacuum_right(n_sites);
  std::fill(c.links.begin(), c.links.end(), std::uint8_t{0});
  return c;
}

ChainConfig true_vacuum(int n_sites) {
  ChainConfig c;
  for (int n = 1; n <= n_sites; ++n) c.matter.push_back(n % 2 == 0);
  for (int k = 1; k < n_sites; ++k) c.links.push_back(k % 2 == 0);
  return c;
}

BulkSelection central_bulk(int n_sites, int count) {
  const double centre = 0.5 * (n_sites + 1);
  auto pick = [&](int first, int last, int parity, double offset) {
    std::vector<int> idx;
    for (int k = first; k <= last; ++k) {
      if (k % 2 == parity) idx.push_back(k);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return std::abs(a + offset - centre) < std::abs(b + offset - centre);
    });
    if (static_cast<int>(idx.size()) > count) idx.resize(static_cast<std::size_t>(count));
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  BulkSelection sel;
  sel.odd_sites = pick(1, n_sites, 1, 0.0);
  sel.even_sites = pick(1, n_sites, 0, 0.0);
  // Link k sits between sites k and k+1.
  sel.odd_links = pick(1, n_sites - 1, 1, 0.5);
  sel.even_links = pick(1, n_sites - 1, 0, 0.5);
  return sel;
}

BulkObservables bulk_observables(const GaugeSector& s, const CVector& psi, const BulkSelection& sel) {
  auto mean = [&](const std::vector<int>& idx, auto fn) {
    double acc = 0.0;
    for (int k : idx) acc += fn(k);
    return idx.empty() ? 0.0 : acc / static_cast<double>(idx.size());
  };
  BulkObservables o;
  o.n_odd = mean(sel.odd_sites, [&](int n) { return particle_number(s, psi, n); });
  o.n_even = mean(sel.even_sites, [&](int n) { return particle_number(s, psi, n); });
  o.e_odd = mean(sel.odd_links, [&](int k) { return electric_field(s, psi, k); });
  o.e_even = mean(sel.even_links, [&](int k) { return electric_field(s, psi, k); });
  return o;
}

FalseVacuumResult false_vacuum_experiment(int n_sites, double mu_over_j, double t_max_in_j_units,
                                          VacuumStart start, std::size_t n_samples) {
  if (n_sites % 2 != 0 || n_sites < 2 || n_sites > 14) {
    throw std::invalid_argument("false_vacuum_experiment: L must be even and at most 14");
  }
  if (n_samples < 2) throw std::invalid_argument("false_vacuum_experiment: need at least two samples");
  const LatticeSpec lat{n_sites, -1, -1};
  const GaugeSector sector = enumerate_gauge_sector(lat);
  const ChainConfig c0 = start == VacuumStart::false_vacuum_right ? false_vacuum_right(n_sites) : true_vacuum(n_sites);
  const CVector psi0 = sector.basis_state(c0);
  const BulkSelection sel = central_bulk(n_sites);

  FalseVacuumResult res;
  res.n_sites = n_sites;
  res.mu_over_j = mu_over_j;
  res.sector_dim = sector.dim();
  res.times = linspace(0.0, t_max_in_j_units, n_samples);

  const CMatrix h = build_qlm_hamiltonian(sector, {mu_over_j, 1.0}).to_dense();
  const SpectralPropagator prop(h);
  const double e0 = (psi0.adjoint() * h * psi0)(0, 0).real();
  const double hnorm = h.cwiseAbs().maxCoeff();
  for (double t : res.times) {
    const CVector psi = prop.apply(psi0, t);
    res.series.push_back(bulk_observables(sector, psi, sel));
    res.max_norm_error = std::max(res.max_norm_error, std::abs(psi.norm() - 1.0));
    for (int n = 1; n <= n_sites; ++n) {
      res.max_gauss_violation = std::max(res.max_gauss_violation, std::abs(gauss_expectation(sector, psi, n)));
    }
    const double e = (psi.adjoint() * h * psi)(0, 0).real();
    res.max_energy_drift = std::max(res.max_energy_drift, std::abs(e - e0) / std::max(hnorm, 1.0));
  }

  // Ground state of the J-only Hamiltonian; a degenerate manifold is averaged.
  const EigenSystem gs = eigh(build_qlm_hamiltonian(sector, {0.0, 1.0}));
  int deg = 1;
  while (deg < gs.values.size() && gs.values[deg] - gs.values[0] < 1e-9) ++deg;
  res.ground_state_degeneracy = deg;
  BulkObservables avg;
  for (int k = 0; k < deg; ++k) {
    const BulkObservables o = bulk_observables(sector, gs.vectors.col(k), sel);
    avg.n_odd += o.n_odd / deg;
    avg.n_even += o.n_even / deg;
    avg.e_odd += o.e_odd / deg;
    avg.e_even += o.e_even / deg;
  }
  res.ground_state = avg;
  return res;
}

}  // namespace lgtsim::qlm
