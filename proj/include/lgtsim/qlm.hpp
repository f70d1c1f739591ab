#pragma once

#include "lgtsim/numkit.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lgtsim::qlm {

// Open chain of L matter sites and L-1 links. The fields b_L, b_R stand in for
// the missing links tau^z_{0,1} and tau^z_{L,L+1} in the Gauss generator.
struct LatticeSpec {
  int n_sites = 2;
  int boundary_left = -1;
  int boundary_right = -1;

  int n_links() const { return n_sites - 1; }
  void validate() const;
};

// Bit 1 means |1>: occupied site (sigma^z = -1) or right-pointing link (tau^z = -1).
struct ChainConfig {
  std::vector<std::uint8_t> matter;
  std::vector<std::uint8_t> links;

  // Interleaved m1 l1 m2 l2 ... mL, the transmon ket order.
  std::string ket() const;
  static ChainConfig from_ket(const std::string& ket);
  std::uint64_t key() const;

  bool operator==(const ChainConfig& o) const { return matter == o.matter && links == o.links; }
  bool operator!=(const ChainConfig& o) const { return !(*this == o); }
};

inline int spin_z(std::uint8_t bit) { return bit ? -1 : 1; }

struct GaugeSector {
  LatticeSpec lattice;
  std::vector<ChainConfig> states;
  std::unordered_map<std::uint64_t, Index> index_of;

  Index dim() const { return static_cast<Index>(states.size()); }
  std::optional<Index> find(const ChainConfig& c) const;
  CVector basis_state(const ChainConfig& c) const;
};

struct QlmParams {
  double mu = 0.0;
  double j = 1.0;
};

// G_n = 1/2 [sigma^z_n - (-1)^n] - 1/2 (tau^z_{n,n+1} - tau^z_{n-1,n}), sites numbered from 1.
double gauss_eigenvalue(const LatticeSpec& lat, const ChainConfig& c, int n);
bool satisfies_gauss_law(const LatticeSpec& lat, const ChainConfig& c);

// Lexicographic on the interleaved bit pattern. Supports L <= 16.
GaugeSector enumerate_gauge_sector(const LatticeSpec& lat);

LinearOperator build_qlm_hamiltonian(const GaugeSector& sector, const QlmParams& p);
// Site-resolved masses: diagonal (1/2) sum_n (-1)^n mu_n sigma^z_n.
LinearOperator build_qlm_hamiltonian(const GaugeSector& sector, const std::vector<double>& mu_sites, double j);

double particle_number(const ChainConfig& c, int n);   // (1 - sigma^z_n) / 2
double electric_field(const ChainConfig& c, int link);  // -tau^z_{n,n+1}
double particle_number(const GaugeSector& s, const CVector& psi, int n);
double electric_field(const GaugeSector& s, const CVector& psi, int link);
double gauss_expectation(const GaugeSector& s, const CVector& psi, int n);

std::vector<CVector> evolve(const GaugeSector& sector, const LinearOperator& h, const CVector& psi0,
                            const std::vector<double>& times);

enum class Symmetry { parity, charge_conjugation };

// Parity mirrors sites n -> L+1-n and mirrors and flips links. It maps the sector of
// (b_L, b_R) onto that of (-b_R, -b_L) when L is odd; for even L it exchanges the
// staggered sublattices. Charge conjugation shifts by one site with complement and
// link flip; the vacated left link takes -b_L and the vacated site takes the
// complement of site L, so only the bulk relations are convention-free.
ChainConfig symmetry_transform(const LatticeSpec& lat, const ChainConfig& c, Symmetry kind);
LatticeSpec transformed_lattice(const LatticeSpec& lat, Symmetry kind);

ChainConfig false_vacuum_right(int n_sites);  // odd sites filled, all links right
ChainConfig false_vacuum_left(int n_sites);   // odd sites filled, all links left
ChainConfig true_vacuum(int n_sites);         // even sites filled, odd links left, even links right

struct BulkSelection {
  std::vector<int> odd_sites, even_sites, odd_links, even_links;
};
// The `count` odd/even sites (links) closest to the chain centre, lower index on ties.
BulkSelection central_bulk(int n_sites, int count = 3);

struct BulkObservables {
  double n_odd = 0, n_even = 0, e_odd = 0, e_even = 0;
};
BulkObservables bulk_observables(const GaugeSector& s, const CVector& psi, const BulkSelection& sel);

enum class VacuumStart { false_vacuum_right, true_vacuum };

struct FalseVacuumResult {
  int n_sites = 0;
  double mu_over_j = 0.0;
  Index sector_dim = 0;
  std::vector<double> times;  // in units of 1/J
  std::vector<BulkObservables> series;
  BulkObservables ground_state;    // J-only Hamiltonian
  int ground_state_degeneracy = 1;
  double max_gauss_violation = 0.0;
  double max_norm_error = 0.0;
  double max_energy_drift = 0.0;
};

FalseVacuumResult false_vacuum_experiment(int n_sites, double mu_over_j, double t_max_in_j_units,
                                          VacuumStart start, std::size_t n_samples = 2001);

}  // namespace lgtsim::qlm
