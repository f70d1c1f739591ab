#include "lgtsim/drive.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lgtsim;
using namespace lgtsim::drive;

namespace {

const DrivenModel& model() {
  static const DrivenModel m = [] {
    const auto cal = circuit::calibrate_ej(circuit::reference_device_targets());
    return make_driven_model(cal.params);
  }();
  return m;
}

// Generalised Rabi chevron P = 4J^2/W^2 sin^2(W t / 2), W^2 = 4J^2 + (w - w0)^2.
ChevronGrid synthetic_chevron(double j, double w0, double span) {
  ChevronGrid g;
  g.omega_p = linspace(w0 - span, w0 + span, 41);
  g.times = linspace(0.0, 3.0 * kPi / j, 101);
  for (double w : g.omega_p) {
    const double d = w - w0, big = std::sqrt(4 * j * j + d * d);
    std::vector<double> col;
    for (double t : g.times) col.push_back(4 * j * j / (big * big) * std::pow(std::sin(0.5 * big * t), 2));
    g.p110.push_back(col);
  }
  return g;
}

}  // namespace

TEST(drive_spec, validation_and_envelope) {
  EXPECT_THROW(DriveSpec({0.6, 1.0}).validate(), std::invalid_argument);
  EXPECT_THROW(DriveSpec({0.1, -1.0}).validate(), std::invalid_argument);
  DriveSpec d{0.1, 2.0, 0.0, 10.0};
  EXPECT_DOUBLE_EQ(d.envelope(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(d.envelope(5.0), 0.5);
  EXPECT_DOUBLE_EQ(d.envelope(20.0), 1.0);
  EXPECT_NEAR(d.alpha(20.0), 0.1 * std::cos(40.0), 1e-15);
}

TEST(driven_model, resonance_and_labels) {
  const DrivenModel& m = model();
  EXPECT_EQ(m.dim(), kDefaultDrivenLevels);
  EXPECT_EQ(m.energies[m.index("000")], 0.0);
  const auto cal = circuit::calibrate_ej(circuit::reference_device_targets());
  const auto s = circuit::dressed_spectrum(cal.params);
  EXPECT_NEAR(m.omega_3q0(), s.transition("001", "110"), 1e-9);
  EXPECT_THROW(m.index("555"), circuit::LabelingError);
}

TEST(drive_hamiltonian, hermitian_and_vanishes_without_drive) {
  const DrivenModel& m = model();
  const CMatrix h = drive_hamiltonian(m, {0.05, m.omega_3q0()}, 0.3);
  EXPECT_LT(hermiticity_defect(h), 1e-14);
  EXPECT_GT(h.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(drive_hamiltonian(m, {0.0, m.omega_3q0()}, 0.3).cwiseAbs().maxCoeff(), 0.0);
}

TEST(perturbation, j_linear_and_shift_quadratic_in_amplitude) {
  const DrivenModel& m = model();
  const double a = amplitude_for_j(m, mhz(2.0));
  EXPECT_NEAR(perturbative_j(m, a), mhz(2.0), 1e-15);
  EXPECT_NEAR(perturbative_j(m, 0.5 * a), mhz(1.0), 1e-15);
  const ShiftPrediction full = perturbative_shift(m, a), half = perturbative_shift(m, 0.5 * a);
  EXPECT_NEAR(half.total(), full.total() / 4.0, 1e-12 * std::abs(full.total()));
  EXPECT_NEAR(half.cos_term, full.cos_term / 4.0, 1e-12 * std::abs(full.cos_term));
  EXPECT_EQ(perturbative_shift(m, 0.0).total(), 0.0);
  EXPECT_NE(full.sin_term, 0.0);
}

TEST(evolution, no_drive_keeps_initial_state) {
  const DrivenModel& m = model();
  const auto ev = evolve_driven(m, {0.0, m.omega_3q0()}, "001", linspace(0.0, 200.0, 11));
  for (const auto& p : ev.populations) EXPECT_NEAR(p[1], 1.0, 1e-12);  // tracked order 000 001 010 100 110
}

TEST(evolution, resonant_drive_stays_in_gauge_pair) {
  const DrivenModel& m = model();
  const OdeOptions opts = unitary_ode_options();
  double leak[2] = {};
  for (int i = 0; i < 2; ++i) {
    const double j = mhz(0.5 * (i + 1));
    const double a = amplitude_for_j(m, j);
    const double wp = m.omega_3q0() + perturbative_shift(m, a).total();
    const auto ev = evolve_driven(m, {a, wp}, "001", linspace(0.0, kPi / j, 81));
    EXPECT_LT(ev.max_norm_error, 100 * opts.rtol);
    double peak = 0.0;
    for (const auto& p : ev.populations) peak = std::max(peak, p[4]);
    EXPECT_GT(peak, 0.95);
    // A full swap cycle brings the population back to 001.
    EXPECT_GT(ev.populations.back()[1], 0.98);
    leak[i] = ev.max_leakage;
  }
  // Leakage out of {001, 110} is drive-induced admixture, second order in the amplitude.
  EXPECT_LT(leak[1], 0.02);
  EXPECT_NEAR(leak[1] / leak[0], 4.0, 0.4);
}

TEST(evolution, stroboscopic_matches_direct_integration) {
  const DrivenModel& m = model();
  const double a = amplitude_for_j(m, mhz(2.0));
  const DriveSpec d{a, m.omega_3q0()};
  const auto times = linspace(0.0, 60.0, 7);
  const auto s = evolve_driven(m, d, "001", times, Propagation::stroboscopic);
  const auto o = evolve_driven(m, d, "001", times, Propagation::direct);
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t l = 0; l < s.labels.size(); ++l) EXPECT_NEAR(s.populations[k][l], o.populations[k][l], 1e-6);
}

TEST(evolution, ramped_envelope_uses_direct_path) {
  const DrivenModel& m = model();
  const double a = amplitude_for_j(m, mhz(2.0));
  const auto ev = evolve_driven(m, {a, m.omega_3q0(), 0.0, 20.0}, "001", linspace(0.0, 40.0, 5));
  EXPECT_LT(ev.max_norm_error, 1e-7);
  EXPECT_THROW(evolve_driven(m, {a, m.omega_3q0(), 0.0, 20.0}, "001", linspace(0.0, 40.0, 5), Propagation::stroboscopic),
               std::invalid_argument);
}

TEST(chevron, rabi_column_fit_recovers_frequency) {
  const auto t = linspace(0.0, 900.0, 101);
  std::vector<double> p;
  for (double x : t) p.push_back(0.8 * std::pow(std::sin(0.5 * 0.0173 * x), 2));
  const ColumnFit f = fit_rabi_column(t, p);
  EXPECT_NEAR(f.contrast, 0.8, 1e-6);
  EXPECT_NEAR(f.omega_gen, 0.0173, 1e-8);
  EXPECT_LT(f.rms_residual, 1e-6);
}

TEST(chevron, extraction_on_synthetic_generalized_rabi_grid) {
  const double j = mhz(1.7), w0 = ghz(6.48) + mhz(0.33);
  const ChevronFit fit = extract_j_and_center(synthetic_chevron(j, w0, 5.0 * j));
  EXPECT_TRUE(fit.interior);
  EXPECT_NEAR(fit.j / j, 1.0, 1e-4);
  EXPECT_NEAR(fit.omega_3q, w0, 1e-3 * j);
  EXPECT_LT(fit.max_rms_residual, kColumnResidualLimit);
}

TEST(chevron, scan_independent_of_thread_count) {
  const DrivenModel& m = model();
  const double a = amplitude_for_j(m, mhz(2.0));
  const double w = m.omega_3q0();
  const std::vector<double> omegas{w - mhz(3), w, w + mhz(3)};
  const auto times = linspace(0.0, 100.0, 5);
  const ChevronGrid g1 = chevron_scan(m, a, omegas, times, 1);
  const ChevronGrid g2 = chevron_scan(m, a, omegas, times, 2);
  EXPECT_EQ(g1.p110, g2.p110);
}
