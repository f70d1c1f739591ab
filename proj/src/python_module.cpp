#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lgtsim/chain.hpp"
#include "lgtsim/circuit.hpp"
#include "lgtsim/drive.hpp"
#include "lgtsim/numkit.hpp"
#include "lgtsim/qlm.hpp"
#include "lgtsim/readout.hpp"

namespace py = pybind11;
using namespace lgtsim;

namespace {

std::vector<std::string> sector_kets(const qlm::GaugeSector& s) {
  std::vector<std::string> out;
  for (const auto& c : s.states) out.push_back(c.ket());
  return out;
}

qlm::LatticeSpec lattice(int n_sites, int b_left, int b_right) {
  qlm::LatticeSpec lat;
  lat.n_sites = n_sites;
  lat.boundary_left = b_left;
  lat.boundary_right = b_right;
  return lat;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lattice gauge theory and three-transmon circuit simulation";
  m.attr("__version__") = LGTSIM_VERSION;

  m.def("ghz", &ghz);
  m.def("mhz", &mhz);
  m.def("to_ghz", &to_ghz);
  m.def("to_mhz", &to_mhz);

  m.def("kron", &kron);
  m.def("eigh", [](const CMatrix& h) {
    auto es = eigh(h);
    return py::make_tuple(es.values, es.vectors);
  });
  m.def("expm_unitary", &expm_unitary, py::arg("h"), py::arg("t"));

  m.def(
      "gauge_sector",
      [](int n_sites, int b_left, int b_right) { return sector_kets(qlm::enumerate_gauge_sector(lattice(n_sites, b_left, b_right))); },
      py::arg("n_sites"), py::arg("boundary_left") = -1, py::arg("boundary_right") = -1);
  m.def(
      "gauss_eigenvalue",
      [](const std::string& ket, int n, int b_left, int b_right) {
        const auto c = qlm::ChainConfig::from_ket(ket);
        return qlm::gauss_eigenvalue(lattice(static_cast<int>(c.matter.size()), b_left, b_right), c, n);
      },
      py::arg("ket"), py::arg("site"), py::arg("boundary_left") = -1, py::arg("boundary_right") = -1);
  m.def(
      "qlm_hamiltonian",
      [](int n_sites, double mu, double j) {
        const auto s = qlm::enumerate_gauge_sector(lattice(n_sites, -1, -1));
        return qlm::build_qlm_hamiltonian(s, {mu, j}).to_dense();
      },
      py::arg("n_sites"), py::arg("mu"), py::arg("j") = 1.0);
  m.def(
      "false_vacuum",
      [](int n_sites, double mu_over_j, double t_max, bool true_vacuum, std::size_t n_samples) {
        const auto r = qlm::false_vacuum_experiment(
            n_sites, mu_over_j, t_max, true_vacuum ? qlm::VacuumStart::true_vacuum : qlm::VacuumStart::false_vacuum_right,
            n_samples);
        Eigen::MatrixXd obs(static_cast<Index>(r.series.size()), 4);
        for (std::size_t k = 0; k < r.series.size(); ++k) {
          const auto& o = r.series[k];
          obs.row(static_cast<Index>(k)) << o.n_odd, o.n_even, o.e_odd, o.e_even;
        }
        py::dict d;
        d["times"] = r.times;
        d["observables"] = obs;
        d["ground_state"] = std::vector<double>{r.ground_state.n_odd, r.ground_state.n_even, r.ground_state.e_odd,
                                                r.ground_state.e_even};
        d["sector_dim"] = r.sector_dim;
        d["max_gauss_violation"] = r.max_gauss_violation;
        return d;
      },
      py::arg("n_sites"), py::arg("mu_over_j"), py::arg("t_max"), py::arg("true_vacuum") = false,
      py::arg("n_samples") = 2001);

  m.def("reference_calibration", [] {
    const auto cal = circuit::calibrate_ej(circuit::reference_device_targets());
    py::dict d;
    d["iterations"] = cal.iterations;
    d["dressed_ghz"] = std::vector<double>{to_ghz(cal.dressed[0]), to_ghz(cal.dressed[1]), to_ghz(cal.dressed[2])};
    d["max_error_mhz"] = to_mhz(cal.max_error);
    d["ej_ghz"] = std::vector<double>{to_ghz(cal.params.ej1), to_ghz(cal.params.ej_sum), to_ghz(cal.params.ej3)};
    const auto spec = circuit::dressed_spectrum(cal.params);
    py::dict tr;
    for (const auto& t : circuit::transition_table(spec)) tr[py::str(t.from + "->" + t.to)] = to_ghz(t.omega);
    d["transitions_ghz"] = tr;
    return d;
  });

  m.def(
      "steady_state_field",
      [](double omega_r, double kappa_int, double kappa_ext, double chi_s, cplx eps, double omega_m) {
        readout::ReadoutParams rp;
        rp.omega_r = omega_r;
        rp.kappa_int = kappa_int;
        rp.kappa_ext = kappa_ext;
        rp.chi.fill(chi_s);
        return readout::steady_state_field(rp, 0, eps, omega_m);
      },
      py::arg("omega_r"), py::arg("kappa_int"), py::arg("kappa_ext"), py::arg("chi"), py::arg("epsilon_m"),
      py::arg("omega_m"));
  m.def("readout_state_labels", [] { return std::vector<std::string>(readout::kStateLabels.begin(), readout::kStateLabels.end()); });
  m.def("rate_matrix", [](const std::array<double, 5>& down, const std::array<double, 5>& up) {
    readout::DecayRates r{down, up};
    return readout::rate_matrix(r);
  });
  m.def("gauge_diagnostics", [](const std::array<double, 5>& p) {
    const auto g = readout::gauge_diagnostics(p);
    py::dict d;
    d["p_inv"] = g.p_inv;
    d["g1"] = g.g1;
    d["g2"] = g.g2;
    d["sigma_z1"] = g.sigma_z1;
    d["tau_z"] = g.tau_z;
    d["sigma_z2"] = g.sigma_z2;
    return d;
  });

  m.def("chain_states", [](const std::vector<double>& omega, const std::vector<double>& chi) {
    chain::ChainSpec spec{4, omega, chi};
    std::vector<py::tuple> out;
    for (const auto& s : chain::gauge_states_and_energies(spec))
      out.push_back(py::make_tuple(s.name, s.ket, s.energy, s.expression));
    return out;
  });
  m.def("detunings_from_masses", [](const std::array<double, 4>& mu) {
    return chain::detunings_from_masses({mu});
  });
  m.def(
      "masses_from_detunings",
      [](const std::array<double, 3>& delta, int pin_index, double pin_value) {
        return chain::masses_from_detunings(delta, pin_index, pin_value).mu;
      },
      py::arg("delta"), py::arg("pin_index"), py::arg("pin_value"));
}
