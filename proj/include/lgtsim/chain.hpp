#pragma once

#include "lgtsim/numkit.hpp"
#include "lgtsim/qlm.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace lgtsim::chain {

// Transmons 1..2N-1 alternate matter and link qubits; omega and chi in rad/ns.
struct ChainSpec {
  int n_matter = 4;
  std::vector<double> omega;  // per transmon
  std::vector<double> chi;    // chi[i] couples transmons i+1 and i+2

  int n_transmons() const { return 2 * n_matter - 1; }
  void validate() const;
};

struct TargetMasses {
  std::array<double, 4> mu{};
};

using Detunings = std::array<double, 3>;

// Diagonal energy sum_i omega_i b_i + sum_i chi_{i,i+1} b_i b_{i+1} of a ket.
double ket_energy(const ChainSpec& spec, const std::string& ket);
// The same sum written out, e.g. "w3 + w4 + w7 + chi34".
std::string energy_expression(const std::string& ket);

// Gauge-invariant sector of the chain, for any number of matter sites.
qlm::GaugeSector chain_sector(int n_matter);

struct GaugeState {
  std::string name;  // I .. V
  std::string ket;
  double energy = 0.0;
  std::string expression;
};

inline const std::array<std::string, 5> kStateNames = {"I", "II", "III", "IV", "V"};

// Requires n_matter = 4.
std::vector<GaugeState> gauge_states_and_energies(const ChainSpec& spec);

// One three-body coupling: link n joins state a (pattern 001 on m_n l_n m_{n+1}) and b (110).
struct Coupling {
  int link = 0;  // 1-based
  int a = 0;     // index into the five states
  int b = 0;
};
// Derived from the kets; order follows the link index then a.
std::vector<Coupling> coupling_pairs(const std::vector<std::string>& kets);

struct ResonanceFrequencies {
  std::array<double, 3> closed_form{};
  std::array<double, 3> route_a{};  // IV-II, II-I, III-II
  std::array<double, 3> route_b{};  // V-III, II-I, V-IV
};

ResonanceFrequencies resonance_frequencies(const ChainSpec& spec);

// delta = (-mu1 - mu2, mu2 + mu3, -mu3 - mu4): three combinations of the four masses.
Detunings detunings_from_masses(const TargetMasses& mu);
// pin_index is 1..4.
TargetMasses masses_from_detunings(const Detunings& delta, int pin_index, double pin_value);

// Diagonal 1/2 sum_n (-1)^n mu_n sigma^z_n of a chain ket.
double staggered_mass_energy(const TargetMasses& mu, const std::string& ket);

struct FrameElement {
  std::string label;  // e.g. "I-II"
  int row = 0;
  int col = 0;
  int link = 0;
  double j = 0.0;
  double time_coefficient = 0.0;  // omega_3q + delta - (eps_col - eps_row)
};

struct FrameReport {
  bool ok = false;
  CMatrix hamiltonian;  // rotating-frame Hamiltonian at t = 0
  std::vector<FrameElement> elements;
  std::array<double, 5> diagonal{};
  std::array<double, 5> target_diagonal{};
  std::array<double, 5> reference_energies{};
  double max_time_coefficient = 0.0;
  double max_diagonal_error = 0.0;
  std::vector<std::string> violations;
};

inline constexpr double kFrameTolerance = 1e-12;

// Reference energies default to E_n minus the staggered-mass target.
FrameReport verify_rotating_frame(const ChainSpec& spec, const TargetMasses& mu, const Detunings& delta,
                                  const std::array<double, 3>& j,
                                  const std::optional<std::array<double, 5>>& reference_energies = std::nullopt,
                                  double tol = kFrameTolerance);

}  // namespace lgtsim::chain
