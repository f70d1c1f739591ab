#pragma once

#include "lgtsim/numkit.hpp"
#include "lgtsim/ode.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgtsim::readout {

// Qubit states in the order used by the equations of motion.
enum State : int { s001 = 0, s110 = 1, s100 = 2, s010 = 3, s000 = 4 };
inline constexpr int kStates = 5;
inline const std::array<std::string, kStates> kStateLabels = {"001", "110", "100", "010", "000"};
int state_from_label(const std::string& label);

struct Transition {
  State from;
  State to;
};
// Downward channels; each has a reversed (thermal) partner.
inline constexpr std::array<Transition, 5> kDecayChannels = {{
    {s110, s100}, {s110, s010}, {s100, s000}, {s010, s000}, {s001, s000},
}};

struct DecayRates {
  std::array<double, 5> down{};  // indexed like kDecayChannels, 1/ns
  std::array<double, 5> up{};    // reversed partners
};

// 5x5 generator of the population rate equations.
RMatrix rate_matrix(const DecayRates& r);

struct ReadoutParams {
  double omega_r = 0.0;  // rad/ns
  double alpha = 0.0;    // self-Kerr
  double kappa_int = 0.0;
  double kappa_ext = 0.0;
  std::array<double, kStates> chi{};  // dispersive shift is 2 chi_s
  DecayRates rates;
  double gamma_phi = 0.0;
  // Prefactor of the static chi term on the coherence-field correlators. The commutator
  // gives 2; 1 reproduces the single-chi typesetting.
  double coherence_field_chi_factor = 2.0;

  double kappa() const { return kappa_int + kappa_ext; }
  void validate() const;
};

// Omega acts on [0, t_evolve); the readout tone epsilon_m on [t_evolve, t_evolve + t_readout).
// The coherence rotates at omega_p and the field at omega_m. With omega_110 - omega_001
// set equal to the three-body resonance, the coherence frame detuning is -delta.
struct PulseSchedule {
  cplx omega{0.0, 0.0};
  double delta = 0.0;  // omega_p - omega_3q
  double t_evolve = 0.0;
  cplx epsilon_m{0.0, 0.0};
  double omega_m = 0.0;
  double t_readout = 0.0;

  cplx omega_at(double t) const { return (t >= 0.0 && t < t_evolve) ? omega : cplx(0.0, 0.0); }
  cplx epsilon_at(double t) const {
    return (t >= t_evolve && t < t_evolve + t_readout) ? epsilon_m : cplx(0.0, 0.0);
  }
};

struct CavityBlochState {
  std::array<double, kStates> p{};   // populations
  cplx coherence{0.0, 0.0};          // <|110><001|>
  double photons = 0.0;              // <a^dag a>
  cplx field{0.0, 0.0};              // <a>
  std::array<cplx, kStates> state_field{};  // <|s><s| a>
  cplx coherence_field{0.0, 0.0};    // <|110><001| a>
  cplx coherence_field_rev{0.0, 0.0};  // <|001><110| a>

  static constexpr Index kSize = 15;
  CVector pack() const;
  static CavityBlochState unpack(const CVector& y);
  double population_sum() const;
  cplx resolved_field() const;  // sum_s <|s><s| a>
};

// Which field enters the photon-number equation and the output signal.
enum class FieldModel { state_resolved, mean_field };

class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CavityBlochTrajectory {
  std::vector<double> times;
  std::vector<CavityBlochState> states;
  double max_population_error = 0.0;
  double min_photons = 0.0;
  double max_coherence = 0.0;
};

inline constexpr double kPopulationTolerance = 1e-6;

CVector cavity_bloch_rhs(const ReadoutParams& rp, const PulseSchedule& sched, double t, const CVector& y,
                         FieldModel model = FieldModel::state_resolved);

CavityBlochTrajectory integrate_cavity_bloch(const ReadoutParams& rp, const PulseSchedule& sched,
                                             const CavityBlochState& y0, const std::vector<double>& t_grid,
                                             FieldModel model = FieldModel::state_resolved,
                                             const OdeOptions& opts = dissipative_ode_options());

std::vector<cplx> output_signal(const CavityBlochTrajectory& traj, const ReadoutParams& rp,
                                const PulseSchedule& sched, FieldModel model = FieldModel::state_resolved);

// Frozen qubit state s, alpha = 0: stationary field of the driven damped mode.
cplx steady_state_field(const ReadoutParams& rp, int s, cplx epsilon_m, double omega_m);

// Three-body parameters and the thermal mixture before the pi pulse.
struct ExperimentParams {
  double j = 0.0;        // Omega = -J
  double delta = 0.0;    // omega_p - omega_3q
  double p100 = 0.0;     // thermal single-photon populations
  double p010 = 0.0;
  double p001 = 0.0;

  void validate() const;
};

// Mixture after the pi pulse: the 000 and 001 populations are exchanged.
std::array<double, kStates> initial_populations(const ExperimentParams& e);

struct ReadoutWindow {
  cplx epsilon_m{0.003, 0.0};
  double t_readout = 1500.0;  // ns
  double dt = 10.0;           // sample spacing
  std::size_t samples() const;
  std::vector<double> times() const;  // measured from the start of the readout pulse
};

// Full pipeline through integrate_cavity_bloch; samples the readout window.
std::vector<cplx> experiment_trace(const ReadoutParams& rp, const ExperimentParams& e, double t_evolve, double omega_m,
                                   const ReadoutWindow& w = {}, FieldModel model = FieldModel::state_resolved);

// Linear model for alpha = 0 and the state-resolved field: populations at t_evolve from
// the exact exponential of the population/coherence system, and the readout response as
// a superposition of per-state responses.
std::vector<std::array<double, kStates>> populations_vs_time(const ReadoutParams& rp, const ExperimentParams& e,
                                                             const std::vector<double>& t_evolve);
// responses[s][k]: output at readout sample k when the qubit starts in state s.
std::array<std::vector<cplx>, kStates> basis_responses(const ReadoutParams& rp, double omega_m, const ReadoutWindow& w);
std::vector<cplx> linear_trace(const std::array<std::vector<cplx>, kStates>& responses,
                               const std::array<double, kStates>& p);

// Default readout tones: the bare resonator frequency and every distinct state-shifted one.
std::vector<double> default_readout_frequencies(const ReadoutParams& rp, double min_separation = 1e-9);

struct Channel {
  int resonator = 0;
  double omega_m = 0.0;
};

struct ReadoutDataset {
  std::vector<ReadoutParams> resonators;
  std::vector<Channel> channels;
  std::vector<double> t_evolve;
  ReadoutWindow window;
  // traces[channel][t_evolve index][readout sample]
  std::vector<std::vector<std::vector<cplx>>> traces;
};

struct SyntheticTruth {
  DecayRates rates;
  double gamma_phi = 0.0;
  ExperimentParams experiment;
};

// Generates traces with the full equations plus complex Gaussian noise of per-quadrature
// standard deviation noise_rel * |epsilon_m|.
ReadoutDataset synthesize_dataset(const std::vector<ReadoutParams>& resonators, const SyntheticTruth& truth,
                                  const std::vector<double>& t_evolve, const ReadoutWindow& w, double noise_rel,
                                  std::uint64_t seed, int threads = 1);

// Fitted parameter vector: five downward rates, gamma_phi, J, delta, p100, p010, p001.
inline constexpr int kFitParameters = 11;
inline const std::array<std::string, kFitParameters> kFitParameterNames = {
    "gamma_110_100", "gamma_110_010", "gamma_100_000", "gamma_010_000", "gamma_001_000",
    "gamma_phi", "j", "delta", "p100", "p010", "p001"};

struct FitOptions {
  int starts = 8;
  std::uint64_t seed = 1;
  double start_spread = 0.3;  // log-normal spread of the perturbed starts
  double residual_limit = 0.0;  // 0 disables the check; otherwise rms relative to |epsilon_m|
  bool reject_at_bound = true;
  int max_iterations = 100;  // per start
  double ftol = 1e-8;
};

struct FitResult {
  SyntheticTruth params;
  std::array<double, kFitParameters> x{};
  std::vector<cplx> scale;   // per channel
  std::vector<cplx> offset;  // per channel
  double cost = 0.0;
  double rms_residual = 0.0;  // per quadrature, in units of |epsilon_m|
  std::vector<std::array<double, kStates>> populations;  // model, on the t_evolve grid
  // Populations recovered from the rescaled data: P110, P100, P010 and P001 + P000.
  std::vector<std::array<double, 4>> rescaled;
  std::vector<std::string> at_bound;
  int best_start = 0;
  int evaluations = 0;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

FitResult fit_populations(const ReadoutDataset& data, const SyntheticTruth& guess, const FitOptions& opts = {});

struct GaugeDiagnostics {
  double p_inv = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double sigma_z1 = 0.0;
  double tau_z = 0.0;
  double sigma_z2 = 0.0;
};
// Qubits 1, 2, 3 play matter site 1, the link and matter site 2.
GaugeDiagnostics gauge_diagnostics(const std::array<double, kStates>& p);
std::vector<GaugeDiagnostics> gauge_diagnostics(const std::vector<std::array<double, kStates>>& p);

// Device fixtures: resonators 1-3 with their dispersive shifts; chi_110 is taken additive.
ReadoutParams reference_resonator(int index);
SyntheticTruth reference_truth();

}  // namespace lgtsim::readout
