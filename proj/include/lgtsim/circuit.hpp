#pragma once

#include "lgtsim/numkit.hpp"

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgtsim::circuit {

using Matrix3 = Eigen::Matrix3d;

// All energies in rad/ns (hbar = 1). Flux bias in units of the flux quantum.
struct CircuitParams {
  Matrix3 ec = Matrix3::Zero();  // E_C,jk
  double ej1 = 0.0;
  double ej3 = 0.0;
  double ej_sum = 0.0;  // E_J,L + E_J,R of the SQUID
  double dej = 0.0;     // E_J,L - E_J,R
  double flux_bias = 0.0;

  void validate() const;
  std::array<double, 3> ej() const { return {ej1, ej_sum, ej3}; }
};

inline constexpr double kDefaultSquidAsymmetry = 0.3;

struct TransmonBasis {
  int charge_cutoff = 15;  // charge states -N_c..N_c
  int levels_kept = 6;     // local eigenstates kept per transmon

  void validate() const;
};

class CutoffError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LabelingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// E_C = (e^2/2) M^-1 with the Maxwell capacitance matrix M; capacitances in fF.
Matrix3 charging_matrix_from_capacitances(double c1, double c2, double c3, double c12, double c13, double c23);

// Off-diagonal E_C,jk that reproduces a capacitive coupling g_jk at the given E_J.
double ec_offdiag_from_g(double g, double ec_jj, double ec_kk, double ej_j, double ej_k);

struct PerturbativeCouplings {
  std::array<double, 3> omega0{};  // sqrt(8 E_C E_J) - E_C
  double g12 = 0, g13 = 0, g23 = 0;
};
PerturbativeCouplings perturbative_couplings(const CircuitParams& p);

// Single transmon in the charge basis: 4 E_C n^2 - ej_cos cos(phi) - ej_sin sin(phi).
CMatrix transmon_hamiltonian(int charge_cutoff, double ec, double ej_cos, double ej_sin);
CMatrix charge_operator(int charge_cutoff);
CMatrix cos_phi_operator(int charge_cutoff);
CMatrix sin_phi_operator(int charge_cutoff);

// Static Hamiltonian on the product of truncated local eigenbases, with the operators
// needed downstream expressed in the same product basis.
struct StaticModel {
  TransmonBasis basis;
  CMatrix hamiltonian;
  CMatrix cos_phi2;
  CMatrix sin_phi2;
  std::array<RVector, 3> local_energies;
  double max_edge_weight = 0.0;  // largest ground-state weight at |n| = N_c

  Index dim() const { return hamiltonian.rows(); }
  Index levels() const { return basis.levels_kept; }
  Index product_index(int n1, int n2, int n3) const;
};

inline constexpr double kEdgeWeightLimit = 1e-8;

StaticModel build_static_model(const CircuitParams& p, const TransmonBasis& basis = {});
LinearOperator build_static_hamiltonian(const CircuitParams& p, const TransmonBasis& basis = {});

struct DressedSpectrum {
  RVector energies;  // ascending
  CMatrix states;    // columns, in the product basis
  std::map<std::string, Index> labels;
  std::vector<std::string> label_of;  // empty string when the eigenstate has no dominant product state
  StaticModel model;

  Index index(const std::string& label) const;
  double energy(const std::string& label) const { return energies[index(label)]; }
  double transition(const std::string& from, const std::string& to) const { return energy(to) - energy(from); }
  double cross_kerr_12() const;
};

inline constexpr double kLabelThreshold = 0.5;

DressedSpectrum dressed_spectrum(const CircuitParams& p, const TransmonBasis& basis = {});

// Dressed single-photon frequencies (100, 010, 001) measured from 000.
std::array<double, 3> dressed_qubit_frequencies(const DressedSpectrum& s);

struct CalibrationTargets {
  std::array<double, 3> omega{};    // dressed qubit frequencies
  std::array<double, 3> ec_diag{};  // E_C,jj
  double g12 = 0, g13 = 0, g23 = 0;
  double squid_asymmetry = kDefaultSquidAsymmetry;  // dE_J / E_J
};

struct CalibrationResult {
  CircuitParams params;
  int iterations = 0;
  std::array<double, 3> dressed{};
  double max_error = 0.0;
};

inline constexpr double kCalibrationTolerance = mhz(0.1);
inline constexpr int kCalibrationMaxIterations = 100;

// Fixed-point iteration on E_J; off-diagonal E_C are refreshed from g at every step.
CalibrationResult calibrate_ej(const CalibrationTargets& t, const TransmonBasis& basis = {},
                               double tolerance = kCalibrationTolerance,
                               int max_iterations = kCalibrationMaxIterations);

// Same iteration with a fixed E_C matrix taken from p0.
CalibrationResult calibrate_ej(const std::array<double, 3>& omega, const CircuitParams& p0,
                               const TransmonBasis& basis = {}, double tolerance = kCalibrationTolerance,
                               int max_iterations = kCalibrationMaxIterations);

struct FluxPoint {
  double flux_bias;
  std::array<double, 3> omega;  // qubit 1, 2, 3 branches
  std::array<double, 3> bare_weight;
};

// Single-photon branches followed by their bare character. The three eigenstates
// with largest single-excitation weight are assigned to qubits by maximal total overlap.
std::vector<FluxPoint> spectrum_vs_flux(const CircuitParams& p, const std::vector<double>& flux_bias,
                                        const TransmonBasis& basis = {});

struct SquidMatrixElements {
  CMatrix sin_phi2;  // dressed basis, rows/cols follow the spectrum ordering
  CMatrix cos_phi2;
};
SquidMatrixElements squid_matrix_elements(const DressedSpectrum& s, Index n_levels = -1);

struct TransitionEntry {
  std::string from;
  std::string to;
  double omega;
};
// Transitions into 200, 110, 020 from 000 and from the single-photon states.
std::vector<TransitionEntry> transition_table(const DressedSpectrum& s);

// Published three-transmon device: dressed frequencies, E_C and couplings.
CalibrationTargets reference_device_targets();

}  // namespace lgtsim::circuit
