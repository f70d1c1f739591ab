#include "lgtsim/circuit.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace lgtsim;
using namespace lgtsim::circuit;

namespace {

const CalibrationResult& calibrated() {
  static const CalibrationResult c = calibrate_ej(reference_device_targets());
  return c;
}

// Same device with the coupling E_C rebuilt for a common g on every pair.
CircuitParams with_uniform_g(const CircuitParams& base, double g) {
  CircuitParams p = base;
  const auto ej = p.ej();
  for (int j = 0; j < 3; ++j)
    for (int k = j + 1; k < 3; ++k) {
      const double off = g == 0.0 ? 0.0 : ec_offdiag_from_g(g, p.ec(j, j), p.ec(k, k), ej[static_cast<std::size_t>(j)], ej[static_cast<std::size_t>(k)]);
      p.ec(j, k) = p.ec(k, j) = off;
    }
  return p;
}

}  // namespace

TEST(transmon, charge_basis_levels_match_oracle) {
  const CMatrix h = transmon_hamiltonian(15, ghz(oracle::kTransmonEc), ghz(oracle::kTransmonEj), 0.0);
  const EigenSystem es = eigh(h);
  for (int k = 1; k <= 3; ++k)
    EXPECT_NEAR(to_ghz(es.values[k] - es.values[0]), oracle::kTransmonLevels[static_cast<std::size_t>(k - 1)], 1e-9);
}

TEST(transmon, shift_operators) {
  const int nc = 12;
  const CMatrix c = cos_phi_operator(nc), s = sin_phi_operator(nc), n = charge_operator(nc);
  EXPECT_LT(hermiticity_defect(c), 1e-15);
  EXPECT_LT(hermiticity_defect(s), 1e-15);
  // [n, e^{i phi}] = e^{i phi} away from the truncation edge.
  const CMatrix e = c + kI * s;
  const CMatrix comm = n * e - e * n;
  EXPECT_LT((comm - e).block(1, 1, 2 * nc - 1, 2 * nc - 1).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(TransmonBasis({8, 6}).validate(), std::invalid_argument);
}

TEST(charging_matrix, isolated_islands_give_e2_over_2c) {
  const double e = 1.602176634e-19, h = 6.62607015e-34;
  const Matrix3 ec = charging_matrix_from_capacitances(80.0, 95.0, 70.0, 0.0, 0.0, 0.0);
  EXPECT_NEAR(to_ghz(ec(0, 0)), e * e / (2 * h * 80e-15) * 1e-9, 1e-12);
  EXPECT_NEAR(to_ghz(ec(1, 1)), e * e / (2 * h * 95e-15) * 1e-9, 1e-12);
  EXPECT_EQ(ec(0, 1), 0.0);
  const Matrix3 coupled = charging_matrix_from_capacitances(80.0, 95.0, 70.0, 3.0, 0.5, 4.0);
  EXPECT_LT((coupled - coupled.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GT(coupled(0, 1), 0.0);
  EXPECT_THROW(charging_matrix_from_capacitances(-1.0, 95.0, 70.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST(couplings, offdiag_round_trips_through_perturbative_g) {
  const CircuitParams p = calibrated().params;
  const PerturbativeCouplings g = perturbative_couplings(p);
  const auto t = reference_device_targets();
  EXPECT_NEAR(g.g12, t.g12, 1e-12);
  EXPECT_NEAR(g.g13, t.g13, 1e-12);
  EXPECT_NEAR(g.g23, t.g23, 1e-12);
}

TEST(static_model, hermitian_by_construction) {
  CircuitParams p = calibrated().params;
  p.flux_bias = 0.17;
  const StaticModel m = build_static_model(p);
  EXPECT_EQ(hermiticity_defect(m.hamiltonian), 0.0);
  EXPECT_EQ(m.dim(), 6 * 6 * 6);
  EXPECT_LT(m.max_edge_weight, kEdgeWeightLimit);
  EXPECT_TRUE(build_static_hamiltonian(p).is_hermitian(0.0));
}

TEST(static_model, cutoff_error_when_charge_basis_too_small) {
  CircuitParams p = calibrated().params;
  p.ej1 *= 400.0;
  EXPECT_THROW(build_static_model(p, {10, 6}), CutoffError);
}

TEST(calibration, converges_on_reference_device) {
  const CalibrationResult& c = calibrated();
  const auto t = reference_device_targets();
  EXPECT_GT(c.iterations, 0);
  EXPECT_LT(c.iterations, kCalibrationMaxIterations);
  for (int q = 0; q < 3; ++q) EXPECT_LT(std::abs(c.dressed[static_cast<std::size_t>(q)] - t.omega[static_cast<std::size_t>(q)]), kCalibrationTolerance);
  EXPECT_NEAR(c.params.dej / c.params.ej_sum, kDefaultSquidAsymmetry, 1e-12);
}

TEST(calibration, fixed_ec_variant_agrees) {
  const CalibrationResult& c = calibrated();
  const CalibrationResult again = calibrate_ej(c.dressed, c.params);
  for (int q = 0; q < 3; ++q)
    EXPECT_LT(std::abs(again.dressed[static_cast<std::size_t>(q)] - c.dressed[static_cast<std::size_t>(q)]), kCalibrationTolerance);
}

TEST(spectrum, transition_sum_rule_is_exact) {
  const DressedSpectrum s = dressed_spectrum(calibrated().params);
  const double lhs = s.transition("000", "010") + s.transition("010", "110");
  const double rhs = s.transition("000", "100") + s.transition("100", "110");
  EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::abs(lhs));
}

TEST(spectrum, truncation_converged_below_one_khz) {
  const CircuitParams p = calibrated().params;
  const auto a = transition_table(dressed_spectrum(p, {15, 6}));
  const auto b = transition_table(dressed_spectrum(p, {19, 6}));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].from, b[k].from);
    EXPECT_LT(std::abs(to_mhz(a[k].omega - b[k].omega)), 1e-3) << a[k].from << "->" << a[k].to;
  }
}

TEST(spectrum, labels_are_unique_and_ground_is_000) {
  const DressedSpectrum s = dressed_spectrum(calibrated().params);
  EXPECT_EQ(s.index("000"), 0);
  std::set<Index> seen;
  for (const auto& [label, idx] : s.labels) EXPECT_TRUE(seen.insert(idx).second) << label;
  EXPECT_THROW(s.index("999"), LabelingError);
}

TEST(spectrum, dispersive_shift_scales_as_g_squared) {
  const CircuitParams base = calibrated().params;
  const auto bare = dressed_qubit_frequencies(dressed_spectrum(with_uniform_g(base, 0.0)));
  const auto full = dressed_qubit_frequencies(dressed_spectrum(with_uniform_g(base, mhz(4.0))));
  const auto half = dressed_qubit_frequencies(dressed_spectrum(with_uniform_g(base, mhz(2.0))));
  for (int q = 0; q < 3; ++q) {
    const double ratio = (full[static_cast<std::size_t>(q)] - bare[static_cast<std::size_t>(q)]) /
                         (half[static_cast<std::size_t>(q)] - bare[static_cast<std::size_t>(q)]);
    EXPECT_NEAR(ratio, 4.0, 0.05) << "qubit " << q + 1;
  }
}

TEST(matrix_elements, selection_rules) {
  CircuitParams free = with_uniform_g(calibrated().params, 0.0);
  free.flux_bias = 0.0;
  const DressedSpectrum s0 = dressed_spectrum(free);
  const SquidMatrixElements m0 = squid_matrix_elements(s0);
  EXPECT_LT(std::abs(m0.sin_phi2(s0.index("110"), s0.index("001"))), 1e-12);
  for (Index l = 0; l < m0.sin_phi2.rows(); ++l) EXPECT_LT(std::abs(m0.sin_phi2(l, l)), 1e-12);

  const DressedSpectrum s = dressed_spectrum(calibrated().params);
  const SquidMatrixElements m = squid_matrix_elements(s);
  for (Index l = 0; l < m.sin_phi2.rows(); ++l) EXPECT_LT(std::abs(m.sin_phi2(l, l)), 1e-12);
  EXPECT_GT(std::abs(m.sin_phi2(s.index("110"), s.index("001"))), 1e-4);
  EXPECT_LT((m.cos_phi2 - m.cos_phi2.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(flux_sweep, symmetric_in_bias_and_tracks_three_branches) {
  const CircuitParams p = calibrated().params;
  const auto pts = spectrum_vs_flux(p, {-0.3, 0.0, 0.3});
  ASSERT_EQ(pts.size(), 3u);
  for (int q = 0; q < 3; ++q) EXPECT_NEAR(pts[0].omega[static_cast<std::size_t>(q)], pts[2].omega[static_cast<std::size_t>(q)], 1e-9);
  // Qubit 2 is the tunable one and moves down away from zero bias; 1 and 3 stay put.
  EXPECT_LT(pts[2].omega[1], pts[1].omega[1] - mhz(100.0));
  EXPECT_LT(std::abs(pts[2].omega[0] - pts[1].omega[0]), mhz(100.0));
  for (const auto& pt : pts)
    for (double w : pt.bare_weight) EXPECT_GT(w, 0.5);
  EXPECT_THROW(spectrum_vs_flux(p, {0.7}), std::invalid_argument);
}
