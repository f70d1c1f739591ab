#include "commands.hpp"

#include "lgtsim/chain.hpp"
#include "lgtsim/circuit.hpp"
#include "lgtsim/drive.hpp"
#include "lgtsim/io.hpp"
#include "lgtsim/qlm.hpp"
#include "lgtsim/readout.hpp"

#include <cmath>
#include <iostream>

namespace lgtsim::cli {

namespace {

using io::CsvWriter;
using io::format_double;

std::string fmt(double v) { return format_double(v); }

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("'" + key + "': " + what);
}

json with_hash(json j, const RunContext& ctx) {
  j["config_hash"] = ctx.config_hash;
  return j;
}

// ---- shared blocks ---------------------------------------------------------

qlm::LatticeSpec read_lattice(Section& root, int default_sites) {
  Section s = root.section("lattice");
  qlm::LatticeSpec lat;
  lat.n_sites = s.integer("n_sites", default_sites);
  lat.boundary_left = s.integer("boundary_left", -1);
  lat.boundary_right = s.integer("boundary_right", -1);
  require(lat.n_sites >= 2 && lat.n_sites <= 16, s.key_path("n_sites"), "must be in 2..16");
  require(std::abs(lat.boundary_left) == 1, s.key_path("boundary_left"), "must be +1 or -1");
  require(std::abs(lat.boundary_right) == 1, s.key_path("boundary_right"), "must be +1 or -1");
  return lat;
}

struct CircuitSetup {
  circuit::CalibrationResult calibration;
  circuit::TransmonBasis basis;
};

CircuitSetup read_circuit(Section& root) {
  Section s = root.section("circuit");
  const auto ref = circuit::reference_device_targets();
  circuit::CalibrationTargets t;
  t.omega = {ghz(s.number("omega1_ghz", to_ghz(ref.omega[0]))), ghz(s.number("omega2_ghz", to_ghz(ref.omega[1]))),
             ghz(s.number("omega3_ghz", to_ghz(ref.omega[2])))};
  t.ec_diag = {mhz(s.number("ec1_mhz", to_mhz(ref.ec_diag[0]))), mhz(s.number("ec2_mhz", to_mhz(ref.ec_diag[1]))),
               mhz(s.number("ec3_mhz", to_mhz(ref.ec_diag[2])))};
  t.g12 = mhz(s.number("g12_mhz", to_mhz(ref.g12)));
  t.g13 = mhz(s.number("g13_mhz", to_mhz(ref.g13)));
  t.g23 = mhz(s.number("g23_mhz", to_mhz(ref.g23)));
  t.squid_asymmetry = s.number("squid_asymmetry", ref.squid_asymmetry);
  require(t.squid_asymmetry > -1.0 && t.squid_asymmetry < 1.0, s.key_path("squid_asymmetry"), "must lie in (-1, 1)");
  for (int q = 0; q < 3; ++q) require(t.omega[q] > 0.0 && t.ec_diag[q] > 0.0, s.key_path("omega/ec"), "must be positive");
  CircuitSetup out;
  out.basis.charge_cutoff = s.integer("charge_cutoff", out.basis.charge_cutoff);
  out.basis.levels_kept = s.integer("levels_kept", out.basis.levels_kept);
  require(out.basis.charge_cutoff >= 10, s.key_path("charge_cutoff"), "must be >= 10");
  require(out.basis.levels_kept >= 4, s.key_path("levels_kept"), "must be >= 4");
  out.calibration = circuit::calibrate_ej(t, out.basis);
  return out;
}

json calibration_json(const circuit::CalibrationResult& c) {
  return {{"iterations", c.iterations},
          {"max_error_mhz", to_mhz(c.max_error)},
          {"dressed_ghz", {to_ghz(c.dressed[0]), to_ghz(c.dressed[1]), to_ghz(c.dressed[2])}},
          {"ej_ghz", {to_ghz(c.params.ej1), to_ghz(c.params.ej_sum), to_ghz(c.params.ej3)}},
          {"dej_ghz", to_ghz(c.params.dej)}};
}

drive::ChevronSettings read_chevron_settings(Section& s, int threads) {
  drive::ChevronSettings cs;
  cs.n_omega = static_cast<std::size_t>(s.integer("n_omega", static_cast<int>(cs.n_omega)));
  cs.n_times = static_cast<std::size_t>(s.integer("n_times", static_cast<int>(cs.n_times)));
  cs.span_in_j = s.number("span_in_j", cs.span_in_j);
  cs.rabi_periods = s.number("rabi_periods", cs.rabi_periods);
  cs.threads = threads;
  require(cs.n_omega >= 5, s.key_path("n_omega"), "must be >= 5");
  require(cs.n_times >= 8, s.key_path("n_times"), "must be >= 8");
  require(cs.span_in_j > 0.0 && cs.rabi_periods > 0.0, s.key_path("span_in_j"), "window sizes must be positive");
  return cs;
}

json point_json(const drive::CouplingPoint& p) {
  return {{"amplitude_phi0", p.amplitude},
          {"j_brute_mhz", to_mhz(p.j_brute)},
          {"j_pert_mhz", to_mhz(p.j_pert)},
          {"omega_3q_brute_ghz", to_ghz(p.omega_3q_brute)},
          {"shift_brute_mhz", to_mhz(p.shift_brute)},
          {"shift_second_order_mhz", to_mhz(p.shift_second_order)},
          {"shift_cos_only_mhz", to_mhz(p.shift_cos_only)},
          {"max_column_rms", p.fit.max_rms_residual}};
}

// ---- gauge-sector ----------------------------------------------------------

void run_gauge_sector(Section& root, RunContext& ctx) {
  const auto lat = read_lattice(root, 2);
  ctx.config_read();
  const auto sector = qlm::enumerate_gauge_sector(lat);
  CsvWriter csv(ctx.path("gauge_sector.csv"), {"index", "ket", "matter", "links"});
  for (Index k = 0; k < sector.dim(); ++k) {
    const auto& c = sector.states[static_cast<std::size_t>(k)];
    std::string m, l;
    for (auto b : c.matter) m += b ? '1' : '0';
    for (auto b : c.links) l += b ? '1' : '0';
    csv.row(std::vector<std::string>{std::to_string(k), c.ket(), m, l});
    for (int n = 1; n <= lat.n_sites; ++n)
      if (qlm::gauss_eigenvalue(lat, c, n) != 0.0) throw NumericalFailure("sector state " + c.ket() + " violates Gauss's law");
    std::cout << c.ket() << '\n';
  }
  csv.close();
  ctx.add_artifact("gauge_sector.csv");
  write_json(ctx.path("gauge_sector.json"),
             with_hash({{"n_sites", lat.n_sites},
                        {"boundary_left", lat.boundary_left},
                        {"boundary_right", lat.boundary_right},
                        {"dimension", sector.dim()}},
                       ctx));
  ctx.add_artifact("gauge_sector.json");
}

// ---- spectrum --------------------------------------------------------------

void run_spectrum(Section& root, RunContext& ctx) {
  const auto setup = read_circuit(root);
  Section f = root.section("flux");
  const double lo = f.number("min_phi0", -0.5);
  const double hi = f.number("max_phi0", 0.5);
  const int n = f.integer("points", 51);
  require(lo >= -0.5 && hi <= 0.5 && lo < hi, f.key_path("min_phi0"), "need -0.5 <= min < max <= 0.5");
  require(n >= 2, f.key_path("points"), "must be >= 2");
  ctx.config_read();

  const auto& p = setup.calibration.params;
  const auto sweep = circuit::spectrum_vs_flux(p, linspace(lo, hi, static_cast<std::size_t>(n)), setup.basis);
  CsvWriter csv(ctx.path("spectrum.csv"), {"phi_b", "omega1", "omega2", "omega3"});
  for (const auto& pt : sweep)
    csv.row({pt.flux_bias, to_ghz(pt.omega[0]), to_ghz(pt.omega[1]), to_ghz(pt.omega[2])});
  csv.close();
  ctx.add_artifact("spectrum.csv");

  const auto spec = circuit::dressed_spectrum(p, setup.basis);
  CsvWriter tt(ctx.path("transitions.csv"), {"from", "to", "omega_ghz"});
  for (const auto& t : circuit::transition_table(spec)) tt.row(std::vector<std::string>{t.from, t.to, fmt(to_ghz(t.omega))});
  tt.close();
  ctx.add_artifact("transitions.csv");

  const double sum_a = spec.transition("000", "010") + spec.transition("010", "110");
  const double sum_b = spec.transition("000", "100") + spec.transition("100", "110");
  write_json(ctx.path("spectrum.json"),
             with_hash({{"calibration", calibration_json(setup.calibration)},
                        {"omega_001_110_ghz", to_ghz(spec.transition("001", "110"))},
                        {"cross_kerr_12_mhz", to_mhz(spec.cross_kerr_12())},
                        {"sum_rule_residual_mhz", to_mhz(sum_a - sum_b)},
                        {"max_edge_weight", spec.model.max_edge_weight}},
                       ctx));
  ctx.add_artifact("spectrum.json");
}

// ---- chevron ---------------------------------------------------------------

double read_amplitude(Section& d, const drive::DrivenModel& m) {
  if (d.has("amplitude_phi0")) {
    const double a = d.number("amplitude_phi0");
    require(a > 0.0 && a < 0.5, d.key_path("amplitude_phi0"), "must lie in (0, 0.5)");
    return a;
  }
  const double j = d.number("j_target_mhz", 2.0);
  require(j > 0.0, d.key_path("j_target_mhz"), "must be positive");
  return drive::amplitude_for_j(m, mhz(j));
}

void run_chevron(Section& root, RunContext& ctx) {
  const auto setup = read_circuit(root);
  Section d = root.section("drive");
  const int levels = d.integer("levels", static_cast<int>(drive::kDefaultDrivenLevels));
  const auto model = drive::make_driven_model(setup.calibration.params, setup.basis, levels);
  const double amp = read_amplitude(d, model);
  const auto cs = read_chevron_settings(d, ctx.threads);
  ctx.config_read();
  const auto pt = drive::coupling_point(model, amp, cs);

  CsvWriter csv(ctx.path("chevron.csv"), {"omega_p_GHz", "t_ns", "P110"});
  for (std::size_t i = 0; i < pt.grid.omega_p.size(); ++i)
    for (std::size_t k = 0; k < pt.grid.times.size(); ++k) {
      const double p = pt.grid.p110[i][k];
      if (!(p >= -1e-9 && p <= 1.0 + 1e-6)) throw NumericalFailure("chevron population outside [0, 1]");
      csv.row({to_ghz(pt.grid.omega_p[i]), pt.grid.times[k], p});
    }
  csv.close();
  ctx.add_artifact("chevron.csv");
  json s = point_json(pt);
  s["calibration"] = calibration_json(setup.calibration);
  s["omega_3q0_ghz"] = to_ghz(model.omega_3q0());
  write_json(ctx.path("chevron.json"), with_hash(s, ctx));
  ctx.add_artifact("chevron.json");
}

// ---- coupling-curve --------------------------------------------------------

void run_coupling_curve(Section& root, RunContext& ctx) {
  const auto setup = read_circuit(root);
  Section d = root.section("drive");
  const int levels = d.integer("levels", static_cast<int>(drive::kDefaultDrivenLevels));
  const auto model = drive::make_driven_model(setup.calibration.params, setup.basis, levels);
  std::vector<double> amps;
  if (d.has("amplitudes_phi0")) {
    amps = d.numbers("amplitudes_phi0");
  } else {
    for (double j : d.numbers("j_targets_mhz", {1.0, 1.5, 2.0, 2.5, 3.0})) amps.push_back(drive::amplitude_for_j(model, mhz(j)));
  }
  require(!amps.empty(), d.key_path("amplitudes_phi0"), "need at least one amplitude");
  for (double a : amps) require(a > 0.0 && a < 0.5, d.key_path("amplitudes_phi0"), "must lie in (0, 0.5)");
  const auto cs = read_chevron_settings(d, ctx.threads);
  ctx.config_read();

  CsvWriter csv(ctx.path("coupling_curve.csv"),
                {"amplitude_phi0", "j_brute_mhz", "j_pert_mhz", "omega_3q_brute_ghz", "shift_brute_mhz",
                 "shift_second_order_mhz", "shift_cos_only_mhz"});
  json pts = json::array();
  std::vector<double> x, y;
  for (double a : amps) {
    const auto pt = drive::coupling_point(model, a, cs);
    csv.row({a, to_mhz(pt.j_brute), to_mhz(pt.j_pert), to_ghz(pt.omega_3q_brute), to_mhz(pt.shift_brute),
             to_mhz(pt.shift_second_order), to_mhz(pt.shift_cos_only)});
    pts.push_back(point_json(pt));
    x.push_back(a);
    y.push_back(pt.j_brute);
  }
  csv.close();
  ctx.add_artifact("coupling_curve.csv");

  json s{{"points", pts}, {"omega_3q0_ghz", to_ghz(model.omega_3q0())}, {"calibration", calibration_json(setup.calibration)}};
  if (x.size() >= 2) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
      syy += (y[i] - my) * (y[i] - my);
    }
    s["j_linear_r2"] = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    s["j_slope_mhz_per_phi0"] = to_mhz(sxy / sxx);
  }
  write_json(ctx.path("coupling_curve.json"), with_hash(s, ctx));
  ctx.add_artifact("coupling_curve.json");
}

// ---- readout ---------------------------------------------------------------

readout::SyntheticTruth read_truth(Section s, const readout::SyntheticTruth& def) {
  readout::SyntheticTruth t = def;
  static const char* kLife[5] = {"t1_110_100_ns", "t1_110_010_ns", "t1_100_000_ns", "t1_010_000_ns", "t1_001_000_ns"};
  for (int i = 0; i < 5; ++i) {
    const double life = s.number(kLife[i], 1.0 / def.rates.down[static_cast<std::size_t>(i)]);
    require(life > 0.0, s.key_path(kLife[i]), "must be positive");
    t.rates.down[static_cast<std::size_t>(i)] = 1.0 / life;
  }
  const double tphi = s.number("t_phi_ns", 1.0 / def.gamma_phi);
  require(tphi > 0.0, s.key_path("t_phi_ns"), "must be positive");
  t.gamma_phi = 1.0 / tphi;
  t.experiment.j = mhz(s.number("j_mhz", to_mhz(def.experiment.j)));
  t.experiment.delta = mhz(s.number("delta_mhz", to_mhz(def.experiment.delta)));
  t.experiment.p100 = s.number("p100", def.experiment.p100);
  t.experiment.p010 = s.number("p010", def.experiment.p010);
  t.experiment.p001 = s.number("p001", def.experiment.p001);
  try {
    t.experiment.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.key_path("") + " " + e.what());
  }
  return t;
}

void run_readout(Section& root, RunContext& ctx) {
  Section r = root.section("readout");
  std::vector<readout::ReadoutParams> res;
  std::vector<int> ids = r.integers("resonators", {1, 2, 3});
  require(!ids.empty(), r.key_path("resonators"), "need at least one resonator");
  for (int id : ids) {
    require(id >= 1 && id <= 3, r.key_path("resonators"), "resonator ids are 1, 2 or 3");
    res.push_back(readout::reference_resonator(id));
  }
  const double te_max = r.number("t_evolve_max_ns", 3000.0);
  const double te_step = r.number("t_evolve_step_ns", 25.0);
  require(te_max > 0.0 && te_step > 0.0, r.key_path("t_evolve_step_ns"), "must be positive");
  std::vector<double> te;
  for (int k = 0; k * te_step <= te_max + 1e-9; ++k) te.push_back(k * te_step);
  readout::ReadoutWindow w;
  w.t_readout = r.number("readout_ns", 1500.0);
  w.dt = r.number("sample_ns", 25.0);
  w.epsilon_m = cplx(r.number("epsilon_m_rad_per_ns", 0.003), 0.0);
  require(w.t_readout > 0.0 && w.dt > 0.0 && w.dt <= w.t_readout, r.key_path("sample_ns"), "need 0 < sample_ns <= readout_ns");
  require(std::abs(w.epsilon_m) > 0.0, r.key_path("epsilon_m_rad_per_ns"), "must be nonzero");
  const double noise = r.number("noise_rel", 0.01);
  require(noise >= 0.0, r.key_path("noise_rel"), "must be >= 0");

  const auto truth = read_truth(r.section("truth"), readout::reference_truth());
  readout::SyntheticTruth generic;
  generic.rates.down.fill(1.0 / 2000.0);
  generic.gamma_phi = 1.0 / 2000.0;
  generic.experiment.j = mhz(2.0);
  generic.experiment.delta = 0.0;
  generic.experiment.p100 = generic.experiment.p010 = generic.experiment.p001 = 0.05;
  const auto guess = read_truth(r.section("guess"), generic);

  Section fs = r.section("fit");
  readout::FitOptions fo;
  fo.starts = fs.integer("starts", fo.starts);
  fo.max_iterations = fs.integer("max_iterations", fo.max_iterations);
  fo.ftol = fs.number("ftol", fo.ftol);
  fo.start_spread = fs.number("start_spread", fo.start_spread);
  fo.residual_limit = fs.number("residual_limit", 0.03);
  fo.reject_at_bound = fs.flag("reject_at_bound", fo.reject_at_bound);
  fo.seed = ctx.seed;
  require(fo.starts >= 1, fs.key_path("starts"), "must be >= 1");
  ctx.config_read();

  const auto data = readout::synthesize_dataset(res, truth, te, w, noise, ctx.seed, ctx.threads);
  const auto times = w.times();
  CsvWriter tr(ctx.path("traces.csv"), {"t_evolve_ns", "t_ns", "re_signal", "im_signal", "omega_m_GHz", "resonator_id"});
  for (std::size_t c = 0; c < data.channels.size(); ++c)
    for (std::size_t k = 0; k < te.size(); ++k)
      for (std::size_t j = 0; j < times.size(); ++j) {
        const cplx v = data.traces[c][k][j];
        tr.row({te[k], times[j], v.real(), v.imag(), to_ghz(data.channels[c].omega_m),
                static_cast<double>(ids[static_cast<std::size_t>(data.channels[c].resonator)])});
      }
  tr.close();
  ctx.add_artifact("traces.csv");

  const auto fit = readout::fit_populations(data, guess, fo);
  readout::ReadoutParams truth_rp = res.front();
  truth_rp.rates = truth.rates;
  truth_rp.gamma_phi = truth.gamma_phi;
  const auto truth_pop = readout::populations_vs_time(truth_rp, truth.experiment, te);
  CsvWriter pc(ctx.path("populations.csv"), {"t_evolve_ns", "P001", "P110", "P100", "P010", "P000", "P110_rescaled",
                                             "P100_rescaled", "P010_rescaled", "P001_plus_P000_rescaled"});
  double max_err = 0.0;
  for (std::size_t k = 0; k < te.size(); ++k) {
    std::vector<double> row{te[k]};
    for (int s = 0; s < readout::kStates; ++s) {
      row.push_back(fit.populations[k][static_cast<std::size_t>(s)]);
      max_err = std::max(max_err, std::abs(fit.populations[k][static_cast<std::size_t>(s)] - truth_pop[k][static_cast<std::size_t>(s)]));
    }
    for (double v : fit.rescaled[k]) row.push_back(v);
    pc.row(row);
  }
  pc.close();
  ctx.add_artifact("populations.csv");

  CsvWriter gc(ctx.path("gauge_diagnostics.csv"), {"t_evolve_ns", "P_inv", "G1", "G2", "sigma_z1", "tau_z", "sigma_z2"});
  for (std::size_t k = 0; k < te.size(); ++k) {
    const auto g = readout::gauge_diagnostics(fit.populations[k]);
    gc.row({te[k], g.p_inv, g.g1, g.g2, g.sigma_z1, g.tau_z, g.sigma_z2});
  }
  gc.close();
  ctx.add_artifact("gauge_diagnostics.csv");

  json params = json::object(), truth_j = json::object();
  const std::array<double, readout::kFitParameters> truth_x = {
      truth.rates.down[0], truth.rates.down[1], truth.rates.down[2], truth.rates.down[3], truth.rates.down[4],
      truth.gamma_phi,     truth.experiment.j,  std::abs(truth.experiment.delta), truth.experiment.p100,
      truth.experiment.p010, truth.experiment.p001};
  for (int i = 0; i < readout::kFitParameters; ++i) {
    params[readout::kFitParameterNames[static_cast<std::size_t>(i)]] = fit.x[static_cast<std::size_t>(i)];
    truth_j[readout::kFitParameterNames[static_cast<std::size_t>(i)]] = truth_x[static_cast<std::size_t>(i)];
  }
  json channels = json::array();
  for (std::size_t c = 0; c < data.channels.size(); ++c)
    channels.push_back({{"resonator_id", ids[static_cast<std::size_t>(data.channels[c].resonator)]},
                        {"omega_m_ghz", to_ghz(data.channels[c].omega_m)},
                        {"scale", {fit.scale[c].real(), fit.scale[c].imag()}},
                        {"offset", {fit.offset[c].real(), fit.offset[c].imag()}}});
  write_json(ctx.path("fit_report.json"),
             with_hash({{"units", "rates in 1/ns, j and delta in rad/ns"},
                        {"parameters", params},
                        {"truth", truth_j},
                        {"cost", fit.cost},
                        {"rms_residual_rel", fit.rms_residual},
                        {"best_start", fit.best_start},
                        {"evaluations", fit.evaluations},
                        {"at_bound", fit.at_bound},
                        {"max_population_error", max_err},
                        {"channels", channels}},
                       ctx));
  ctx.add_artifact("fit_report.json");
}

// ---- false-vacuum ----------------------------------------------------------

void run_false_vacuum(Section& root, RunContext& ctx) {
  const auto lat = read_lattice(root, 12);
  Section r = root.section("run");
  const auto mus = r.numbers("mu_over_j", {0.0});
  const double t_max = r.number("t_max_j", 200.0);
  const int samples = r.integer("samples", 2001);
  const std::string start = r.text("start", "false_vacuum_right");
  require(lat.boundary_left == -1 && lat.boundary_right == -1, "lattice", "vacuum runs use the default boundary fields");
  require(lat.n_sites % 2 == 0 && lat.n_sites <= 14, "lattice.n_sites", "must be even and <= 14");
  require(t_max > 0.0, r.key_path("t_max_j"), "must be positive");
  require(samples >= 2, r.key_path("samples"), "must be >= 2");
  require(start == "false_vacuum_right" || start == "true_vacuum", r.key_path("start"),
          "must be false_vacuum_right or true_vacuum");
  require(!mus.empty(), r.key_path("mu_over_j"), "need at least one value");
  ctx.config_read();
  const auto kind = start == "true_vacuum" ? qlm::VacuumStart::true_vacuum : qlm::VacuumStart::false_vacuum_right;

  json runs = json::array();
  for (std::size_t i = 0; i < mus.size(); ++i) {
    const auto res = qlm::false_vacuum_experiment(lat.n_sites, mus[i], t_max, kind, static_cast<std::size_t>(samples));
    if (res.max_gauss_violation > 1e-9 || res.max_norm_error > 1e-9)
      throw NumericalFailure("false-vacuum run broke gauge invariance or normalization");
    const std::string name = mus.size() == 1 ? "false_vacuum.csv" : "false_vacuum_" + std::to_string(i) + ".csv";
    CsvWriter csv(ctx.path(name), {"t_in_J_units", "N_odd", "N_even", "E_odd", "E_even"});
    qlm::BulkObservables late;
    std::size_t n_late = 0;
    for (std::size_t k = 0; k < res.times.size(); ++k) {
      const auto& o = res.series[k];
      csv.row({res.times[k], o.n_odd, o.n_even, o.e_odd, o.e_even});
      if (res.times[k] >= 0.5 * t_max) {
        late.n_odd += o.n_odd, late.n_even += o.n_even, late.e_odd += o.e_odd, late.e_even += o.e_even;
        ++n_late;
      }
    }
    csv.close();
    ctx.add_artifact(name);
    const double inv = n_late ? 1.0 / static_cast<double>(n_late) : 0.0;
    const auto& gs = res.ground_state;
    runs.push_back({{"file", name},
                    {"mu_over_j", mus[i]},
                    {"late_mean", {late.n_odd * inv, late.n_even * inv, late.e_odd * inv, late.e_even * inv}},
                    {"ground_state", {gs.n_odd, gs.n_even, gs.e_odd, gs.e_even}},
                    {"ground_state_degeneracy", res.ground_state_degeneracy},
                    {"sector_dim", res.sector_dim},
                    {"max_gauss_violation", res.max_gauss_violation},
                    {"max_energy_drift", res.max_energy_drift}});
  }
  write_json(ctx.path("false_vacuum.json"),
             with_hash({{"n_sites", lat.n_sites}, {"start", start}, {"t_max_j", t_max}, {"observables", {"N_odd", "N_even", "E_odd", "E_even"}}, {"runs", runs}},
                       ctx));
  ctx.add_artifact("false_vacuum.json");
}

// ---- map-chain -------------------------------------------------------------

void run_map_chain(Section& root, RunContext& ctx) {
  Section c = root.section("chain");
  chain::ChainSpec spec;
  spec.n_matter = 4;
  for (double v : c.numbers("omega_ghz")) spec.omega.push_back(ghz(v));
  for (double v : c.numbers("chi_mhz")) spec.chi.push_back(mhz(v));
  require(spec.omega.size() == 7, c.key_path("omega_ghz"), "needs 7 transmon frequencies");
  require(spec.chi.size() == 6, c.key_path("chi_mhz"), "needs 6 nearest-neighbour shifts");

  chain::TargetMasses mu;
  chain::Detunings delta{};
  if (c.has("masses_mhz")) {
    const auto m = c.numbers("masses_mhz");
    require(m.size() == 4, c.key_path("masses_mhz"), "needs 4 values");
    for (int i = 0; i < 4; ++i) mu.mu[static_cast<std::size_t>(i)] = mhz(m[static_cast<std::size_t>(i)]);
    delta = chain::detunings_from_masses(mu);
  } else {
    const auto d = c.numbers("detunings_mhz", {0.0, 0.0, 0.0});
    require(d.size() == 3, c.key_path("detunings_mhz"), "needs 3 values");
    for (int i = 0; i < 3; ++i) delta[static_cast<std::size_t>(i)] = mhz(d[static_cast<std::size_t>(i)]);
    const int pin = c.integer("pin_site", 4);
    require(pin >= 1 && pin <= 4, c.key_path("pin_site"), "must be 1..4");
    mu = chain::masses_from_detunings(delta, pin, mhz(c.number("pin_mhz", 0.0)));
  }
  const auto jv = c.numbers("j_mhz", {2.0, 2.0, 2.0});
  require(jv.size() == 3, c.key_path("j_mhz"), "needs 3 values");
  const std::array<double, 3> j{mhz(jv[0]), mhz(jv[1]), mhz(jv[2])};
  ctx.config_read();

  const auto states = chain::gauge_states_and_energies(spec);
  const auto sector = chain::chain_sector(4);
  for (std::size_t k = 0; k < states.size(); ++k)
    if (states[k].ket != sector.states[k].ket()) throw NumericalFailure("chain states differ from the gauge sector");
  const auto freqs = chain::resonance_frequencies(spec);
  const auto rep = chain::verify_rotating_frame(spec, mu, delta, j);

  json st = json::array();
  for (const auto& s : states)
    st.push_back({{"name", s.name}, {"ket", s.ket}, {"energy_expression", s.expression}, {"energy_ghz", to_ghz(s.energy)}});
  auto ghz3 = [](const std::array<double, 3>& a) { return json{to_ghz(a[0]), to_ghz(a[1]), to_ghz(a[2])}; };
  auto mhz_list = [](const auto& a) {
    json out = json::array();
    for (double v : a) out.push_back(to_mhz(v));
    return out;
  };
  json els = json::array();
  for (const auto& e : rep.elements)
    els.push_back({{"label", e.label}, {"link", e.link}, {"j_mhz", to_mhz(e.j)}, {"time_coefficient_mhz", to_mhz(e.time_coefficient)}});
  json report{{"states", st},
              {"resonance_ghz", {{"closed_form", ghz3(freqs.closed_form)}, {"route_a", ghz3(freqs.route_a)}, {"route_b", ghz3(freqs.route_b)}}},
              {"masses_mhz", mhz_list(mu.mu)},
              {"detunings_mhz", mhz_list(delta)},
              {"frame",
               {{"ok", rep.ok},
                {"elements", els},
                {"diagonal_mhz", mhz_list(rep.diagonal)},
                {"target_diagonal_mhz", mhz_list(rep.target_diagonal)},
                {"max_time_coefficient_mhz", to_mhz(rep.max_time_coefficient)},
                {"max_diagonal_error_mhz", to_mhz(rep.max_diagonal_error)},
                {"violations", rep.violations}}}};
  write_json(ctx.path("map_chain.json"), with_hash(report, ctx));
  ctx.add_artifact("map_chain.json");
  if (!rep.ok) throw NumericalFailure("rotating-frame conditions violated: " + rep.violations.front());
}

}  // namespace

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> kCommands = {
      {"gauge-sector", run_gauge_sector}, {"spectrum", run_spectrum},         {"chevron", run_chevron},
      {"coupling-curve", run_coupling_curve}, {"readout", run_readout}, {"false-vacuum", run_false_vacuum},
      {"map-chain", run_map_chain},
  };
  return kCommands;
}

}  // namespace lgtsim::cli
