#include "lgtsim/ode.hpp"
#include "lgtsim/qlm.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

using namespace lgtsim;
using namespace lgtsim::qlm;

namespace {

// Full 2^(2L-1) Pauli-space Hamiltonian, qubit order m1 l1 m2 ... with m1 most significant.
CMatrix full_space_hamiltonian(int L, double mu, double j) {
  const int nq = 2 * L - 1;
  CMatrix sp = CMatrix::Zero(2, 2), sz = CMatrix::Zero(2, 2);
  sp(0, 1) = 1.0;
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  const CMatrix sm = sp.adjoint();
  auto op = [&](std::map<int, CMatrix> f) {
    std::vector<CMatrix> factors;
    for (int q = 0; q < nq; ++q) factors.push_back(f.count(q) ? f[q] : CMatrix::Identity(2, 2));
    return kron_all(factors);
  };
  const Index dim = Index{1} << nq;
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int n = 1; n <= L; ++n) h += 0.5 * ((n % 2 == 0) ? 1.0 : -1.0) * mu * op({{2 * n - 2, sz}});
  for (int n = 1; n < L; ++n) {
    const CMatrix hop = op({{2 * n - 2, sp}, {2 * n - 1, sp}, {2 * n, sm}});
    h += -j * (hop + hop.adjoint());
  }
  return h;
}

Index full_index(const ChainConfig& c) { return static_cast<Index>(std::stoull(c.ket(), nullptr, 2)); }

CVector random_sector_state(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVector v(dim);
  for (Index k = 0; k < dim; ++k) v[k] = {n(rng), n(rng)};
  return v.normalized();
}

}  // namespace

TEST(gauge_sector, dimensions_match_exhaustive_scan) {
  for (int L = 2; L <= 12; ++L) {
    const GaugeSector s = enumerate_gauge_sector({L, -1, -1});
    EXPECT_EQ(s.dim(), oracle::kSectorDim[static_cast<std::size_t>(L - 2)]) << "L=" << L;
  }
}

TEST(gauge_sector, two_and_four_site_kets) {
  const GaugeSector s2 = enumerate_gauge_sector({2, -1, -1});
  ASSERT_EQ(s2.dim(), 2);
  EXPECT_EQ(s2.states[0].ket(), "001");
  EXPECT_EQ(s2.states[1].ket(), "110");
  const GaugeSector s4 = enumerate_gauge_sector({4, -1, -1});
  ASSERT_EQ(s4.dim(), 5);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(s4.states[k].ket(), oracle::kSectorKetsL4[k]);
}

TEST(gauge_sector, every_member_satisfies_gauss_and_index_is_consistent) {
  for (int L : {3, 6, 9}) {
    const LatticeSpec lat{L, -1, -1};
    const GaugeSector s = enumerate_gauge_sector(lat);
    for (Index k = 0; k < s.dim(); ++k) {
      const ChainConfig& c = s.states[static_cast<std::size_t>(k)];
      EXPECT_TRUE(satisfies_gauss_law(lat, c));
      ASSERT_TRUE(s.find(c).has_value());
      EXPECT_EQ(*s.find(c), k);
      EXPECT_EQ(ChainConfig::from_ket(c.ket()), c);
      if (k > 0) EXPECT_LT(s.states[static_cast<std::size_t>(k - 1)].ket(), c.ket());
    }
  }
}

TEST(gauss_law, two_site_eigenvalues) {
  const LatticeSpec lat{2, -1, -1};
  for (int code = 0; code < 8; ++code) {
    const std::string ket = {char('0' + ((code >> 2) & 1)), char('0' + ((code >> 1) & 1)), char('0' + (code & 1))};
    const ChainConfig c = ChainConfig::from_ket(ket);
    EXPECT_EQ(gauss_eigenvalue(lat, c, 1), oracle::kGaussL2[code][0]) << ket;
    EXPECT_EQ(gauss_eigenvalue(lat, c, 2), oracle::kGaussL2[code][1]) << ket;
  }
}

TEST(gauss_law, other_boundaries_give_other_sectors) {
  const GaugeSector s = enumerate_gauge_sector({2, 1, 1});
  for (const auto& c : s.states) EXPECT_TRUE(satisfies_gauss_law({2, 1, 1}, c));
  EXPECT_NE(s.dim(), 0);
  EXPECT_THROW(LatticeSpec({2, 0, -1}).validate(), std::invalid_argument);
  EXPECT_THROW(ChainConfig::from_ket("0102"), std::invalid_argument);
}

TEST(hamiltonian, projected_full_space_equals_sector_build) {
  for (int L = 2; L <= 4; ++L) {
    const GaugeSector s = enumerate_gauge_sector({L, -1, -1});
    for (double mu : {0.0, 0.7, -2.3}) {
      const CMatrix full = full_space_hamiltonian(L, mu, 1.3);
      const CMatrix h = build_qlm_hamiltonian(s, {mu, 1.3}).to_dense();
      for (Index r = 0; r < s.dim(); ++r)
        for (Index c = 0; c < s.dim(); ++c) {
          const cplx want = full(full_index(s.states[static_cast<std::size_t>(r)]), full_index(s.states[static_cast<std::size_t>(c)]));
          EXPECT_LT(std::abs(h(r, c) - want), 1e-12) << "L=" << L << " mu=" << mu;
        }
    }
  }
}

TEST(hamiltonian, hopping_closes_on_sector) {
  const int L = 4;
  const GaugeSector s = enumerate_gauge_sector({L, -1, -1});
  const CMatrix full = full_space_hamiltonian(L, 0.0, 1.0);
  std::vector<bool> in_sector(static_cast<std::size_t>(full.rows()), false);
  for (const auto& c : s.states) in_sector[static_cast<std::size_t>(full_index(c))] = true;
  for (const auto& c : s.states) {
    const CVector out = full.col(full_index(c));
    for (Index k = 0; k < out.size(); ++k)
      if (std::abs(out[k]) > 0.0) EXPECT_TRUE(in_sector[static_cast<std::size_t>(k)]);
  }
}

TEST(hamiltonian, site_resolved_masses_and_hermiticity) {
  const GaugeSector s = enumerate_gauge_sector({6, -1, -1});
  const LinearOperator h = build_qlm_hamiltonian(s, {0.4, 0.4, 0.4, 0.4, 0.4, 0.4}, 1.0);
  const LinearOperator g = build_qlm_hamiltonian(s, {0.4, 1.0});
  EXPECT_TRUE(h.is_hermitian());
  EXPECT_EQ((h.to_dense() - g.to_dense()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(build_qlm_hamiltonian(s, {0.4, 0.4}, 1.0), std::invalid_argument);
}

TEST(dynamics, two_site_rabi_oscillation) {
  const GaugeSector s = enumerate_gauge_sector({2, -1, -1});
  const double j = 1.0;
  const auto h = build_qlm_hamiltonian(s, {0.0, j});
  const CVector psi0 = s.basis_state(ChainConfig::from_ket("001"));
  const auto times = linspace(0.0, 10.0, 101);
  const auto traj = evolve(s, h, psi0, times);
  for (std::size_t k = 0; k < times.size(); ++k)
    EXPECT_NEAR(std::norm(traj[k][1]), std::pow(std::sin(j * times[k]), 2), 1e-12);
}

TEST(dynamics, occupations_match_full_space_oracle) {
  for (int L : {4, 6}) {
    const GaugeSector s = enumerate_gauge_sector({L, -1, -1});
    const auto h = build_qlm_hamiltonian(s, {0.7, 1.0});
    const CVector psi = evolve(s, h, s.basis_state(false_vacuum_right(L)), {2.5}).front();
    for (int n = 1; n <= L; ++n) {
      const double want = L == 4 ? oracle::kOccupationL4[static_cast<std::size_t>(n - 1)]
                                 : oracle::kOccupationL6[static_cast<std::size_t>(n - 1)];
      EXPECT_NEAR(particle_number(s, psi, n), want, 1e-10) << "L=" << L << " n=" << n;
    }
  }
}

TEST(dynamics, gauss_norm_energy_conserved_from_random_states) {
  std::mt19937_64 rng(23);
  for (int L : {5, 8}) {
    const GaugeSector s = enumerate_gauge_sector({L, -1, -1});
    const auto h = build_qlm_hamiltonian(s, {0.9, 1.0});
    const CMatrix hd = h.to_dense();
    const CVector psi0 = random_sector_state(s.dim(), rng);
    const double e0 = (psi0.adjoint() * hd * psi0)(0, 0).real();
    for (const auto& psi : evolve(s, h, psi0, linspace(0.0, 200.0, 41))) {
      EXPECT_LT(std::abs(psi.norm() - 1.0), 1e-9);
      EXPECT_LT(std::abs((psi.adjoint() * hd * psi)(0, 0).real() - e0), 1e-9 * hd.cwiseAbs().maxCoeff());
      for (int n = 1; n <= L; ++n) EXPECT_LT(std::abs(gauss_expectation(s, psi, n)), 1e-9);
    }
  }
}

TEST(observables, vacuum_configurations) {
  const ChainConfig fv = false_vacuum_right(4);
  EXPECT_EQ(fv.ket(), "1101110");
  EXPECT_EQ(false_vacuum_left(4).ket(), "1000100");
  EXPECT_EQ(true_vacuum(4).ket(), "0011001");
  EXPECT_DOUBLE_EQ(particle_number(fv, 1), 1.0);
  EXPECT_DOUBLE_EQ(particle_number(fv, 2), 0.0);
  EXPECT_DOUBLE_EQ(electric_field(fv, 1), 1.0);
  EXPECT_DOUBLE_EQ(electric_field(false_vacuum_left(4), 2), -1.0);
  EXPECT_THROW(particle_number(fv, 5), std::out_of_range);
}

TEST(observables, central_bulk_selection) {
  const BulkSelection sel = central_bulk(12);
  EXPECT_EQ(sel.odd_sites, (std::vector<int>{5, 7, 9}));
  EXPECT_EQ(sel.even_sites, (std::vector<int>{4, 6, 8}));
  EXPECT_EQ(sel.odd_links, (std::vector<int>{3, 5, 7}));
  EXPECT_EQ(sel.even_links, (std::vector<int>{4, 6, 8}));
}

TEST(symmetry, parity_and_charge_conjugation_map_sector) {
  for (int L : {3, 5, 7}) {
    const LatticeSpec lat{L, -1, 1};  // symmetric under parity: (b_L, b_R) -> (-b_R, -b_L)
    const GaugeSector s = enumerate_gauge_sector(lat);
    const LatticeSpec lp = transformed_lattice(lat, Symmetry::parity);
    EXPECT_EQ(lp.boundary_left, lat.boundary_left);
    EXPECT_EQ(lp.boundary_right, lat.boundary_right);
    for (const auto& c : s.states) {
      const ChainConfig p = symmetry_transform(lat, c, Symmetry::parity);
      EXPECT_TRUE(satisfies_gauss_law(lp, p)) << c.ket();
      EXPECT_EQ(symmetry_transform(lat, p, Symmetry::parity), c);
    }
  }
  // Charge conjugation: the bulk Gauss generators of the image vanish.
  const LatticeSpec lat{8, -1, -1};
  for (const auto& c : enumerate_gauge_sector(lat).states) {
    const ChainConfig cc = symmetry_transform(lat, c, Symmetry::charge_conjugation);
    for (int n = 2; n < lat.n_sites; ++n) EXPECT_EQ(gauss_eigenvalue(lat, cc, n), 0.0) << c.ket();
  }
}

TEST(false_vacuum, ground_state_and_early_time_match_oracle) {
  const FalseVacuumResult r = false_vacuum_experiment(12, 0.0, 1.5, VacuumStart::false_vacuum_right, 2);
  EXPECT_EQ(r.sector_dim, oracle::kSectorDim[10]);
  EXPECT_EQ(r.ground_state_degeneracy, oracle::kGroundDegeneracyL12);
  const double* want = oracle::kGroundBulkL12.data();
  EXPECT_NEAR(r.ground_state.n_odd, want[0], 1e-9);
  EXPECT_NEAR(r.ground_state.n_even, want[1], 1e-9);
  EXPECT_NEAR(r.ground_state.e_odd, want[2], 1e-9);
  EXPECT_NEAR(r.ground_state.e_even, want[3], 1e-9);
  const BulkObservables& last = r.series.back();
  EXPECT_NEAR(last.n_odd, oracle::kFalseVacuumBulkL12[0], 1e-9);
  EXPECT_NEAR(last.n_even, oracle::kFalseVacuumBulkL12[1], 1e-9);
  EXPECT_NEAR(last.e_odd, oracle::kFalseVacuumBulkL12[2], 1e-9);
  EXPECT_NEAR(last.e_even, oracle::kFalseVacuumBulkL12[3], 1e-9);
  EXPECT_THROW(false_vacuum_experiment(7, 0.0, 1.0, VacuumStart::true_vacuum), std::invalid_argument);
}

TEST(false_vacuum, ground_state_energy_matches_oracle) {
  const GaugeSector s = enumerate_gauge_sector({12, -1, -1});
  const EigenSystem es = eigh(build_qlm_hamiltonian(s, {0.0, 1.0}));
  EXPECT_NEAR(es.values[0], oracle::kGroundEnergyL12, 1e-10);
}
