#pragma once

#include "lgtsim/circuit.hpp"
#include "lgtsim/ode.hpp"

#include <string>
#include <vector>

namespace lgtsim::drive {

// alpha_p(t) = A_p cos(omega_p t + phase), A_p in flux quanta.
struct DriveSpec {
  double amplitude = 0.0;
  double omega_p = 0.0;  // rad/ns
  double phase = 0.0;
  double rise_time = 0.0;  // linear ramp length in ns; 0 means rectangular

  void validate() const;
  double envelope(double t) const;
  double alpha(double t) const { return envelope(t) * amplitude * std::cos(omega_p * t + phase); }
};

// Dressed-basis model truncated to the lowest n_levels eigenstates of the static Hamiltonian.
struct DrivenModel {
  circuit::CircuitParams params;
  RVector energies;  // relative to the dressed ground state
  CMatrix cos_phi2;  // dressed basis
  CMatrix sin_phi2;
  std::map<std::string, Index> labels;

  Index dim() const { return energies.size(); }
  Index index(const std::string& label) const;
  double omega_3q0() const { return energies[index("110")] - energies[index("001")]; }
};

inline constexpr Index kDefaultDrivenLevels = 35;

DrivenModel make_driven_model(const circuit::CircuitParams& p, const circuit::TransmonBasis& basis = {},
                              Index n_levels = kDefaultDrivenLevels);
DrivenModel make_driven_model(const circuit::CircuitParams& p, const circuit::DressedSpectrum& s,
                              Index n_levels = kDefaultDrivenLevels);

// -E_J (cos(pi alpha) - 1) cos phi_2 - dE_J sin(pi alpha) sin phi_2 in the dressed basis.
CMatrix drive_hamiltonian(const DrivenModel& m, const DriveSpec& d, double t);

inline const std::vector<std::string> kTrackedLabels = {"000", "001", "010", "100", "110"};

struct DrivenEvolution {
  std::vector<double> times;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> populations;  // [time][label]
  double max_norm_error = 0.0;
  double max_leakage = 0.0;  // 1 - P001 - P110
};

enum class Propagation { automatic, stroboscopic, direct };

// Schrodinger evolution from a dressed eigenstate. The stroboscopic path builds the
// one-period propagator once and is used for rectangular envelopes.
DrivenEvolution evolve_driven(const DrivenModel& m, const DriveSpec& d, const std::string& psi0_label,
                              const std::vector<double>& times, Propagation how = Propagation::automatic,
                              const OdeOptions& opts = unitary_ode_options());

struct ChevronGrid {
  std::vector<double> omega_p;
  std::vector<double> times;
  std::vector<std::vector<double>> p110;  // [omega index][time index]
  double amplitude = 0.0;
};

ChevronGrid chevron_scan(const DrivenModel& m, double amplitude, const std::vector<double>& omega_p,
                         const std::vector<double>& times, int threads = 1);

struct ColumnFit {
  double contrast = 0.0;
  double omega_gen = 0.0;
  double rms_residual = 0.0;
};
// P(t) = A sin^2(Omega t / 2) by a grid search over Omega followed by least squares.
ColumnFit fit_rabi_column(const std::vector<double>& times, const std::vector<double>& p);

struct ChevronFit {
  double j = 0.0;        // rad/ns
  double omega_3q = 0.0; // rad/ns
  std::size_t resonant_column = 0;
  bool interior = false;  // peak not on the grid edge
  std::vector<ColumnFit> columns;
  double max_rms_residual = 0.0;
};

inline constexpr double kColumnResidualLimit = 0.05;

ChevronFit extract_j_and_center(const ChevronGrid& grid);

double perturbative_j(const DrivenModel& m, double amplitude);

struct ShiftPrediction {
  double cos_term = 0.0;      // static dispersion contribution
  double sin_term = 0.0;      // second-order contribution of the sine channel
  double total() const { return cos_term + sin_term; }
  double min_denominator = 0.0;
  std::vector<std::string> near_degenerate;  // intermediate states with tiny denominators
};

ShiftPrediction perturbative_shift(const DrivenModel& m, double amplitude);

struct CouplingPoint {
  double amplitude = 0.0;
  double j_brute = 0.0;
  double omega_3q_brute = 0.0;
  double j_pert = 0.0;
  double shift_brute = 0.0;
  double shift_second_order = 0.0;
  double shift_cos_only = 0.0;
  ChevronFit fit;
  ChevronGrid grid;  // the window that bracketed the peak
};

struct ChevronSettings {
  std::size_t n_omega = 41;
  std::size_t n_times = 101;
  double span_in_j = 5.0;   // half-width of the frequency window in units of J
  double rabi_periods = 3.0;
  int threads = 1;
};

// Chevron centred on the second-order prediction, recentred if the peak lands on the edge.
CouplingPoint coupling_point(const DrivenModel& m, double amplitude, const ChevronSettings& s = {});

// Amplitude giving a first-order coupling j.
double amplitude_for_j(const DrivenModel& m, double j);

}  // namespace lgtsim::drive
