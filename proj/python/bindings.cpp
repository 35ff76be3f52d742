#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sbs/discrimination.hpp"
#include "sbs/ensemble.hpp"
#include "sbs/oracle.hpp"
#include "sbs/sbs_core.hpp"
#include "sbs/scenarios.hpp"
#include "sbs/spin_model.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectrum broadcast structure monitor for the central-spin model";
  m.attr("__version__") = SBS_VERSION;

  py::register_exception<sbs::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<sbs::SpinParams>(m, "SpinParams")
      .def(py::init([](double alpha, double beta, double gamma_euler, double lambda_, double g) {
             sbs::SpinParams p{alpha, beta, gamma_euler, lambda_, g};
             p.validate();
             return p;
           }),
           py::arg("alpha") = 0.0, py::arg("beta") = 0.0, py::arg("gamma_euler") = 0.0, py::arg("lambda_") = 1.0,
           py::arg("g") = 1.0)
      .def_readwrite("alpha", &sbs::SpinParams::alpha)
      .def_readwrite("beta", &sbs::SpinParams::beta)
      .def_readwrite("gamma_euler", &sbs::SpinParams::gamma_euler)
      .def_readwrite("lambda_", &sbs::SpinParams::lambda)
      .def_readwrite("g", &sbs::SpinParams::g)
      .def("__repr__", [](const sbs::SpinParams& p) {
        return "SpinParams(alpha=" + std::to_string(p.alpha) + ", beta=" + std::to_string(p.beta) +
               ", gamma_euler=" + std::to_string(p.gamma_euler) + ", lambda_=" + std::to_string(p.lambda) +
               ", g=" + std::to_string(p.g) + ")";
      });

  m.def("decoherence_factor", [](const std::vector<sbs::SpinParams>& spins, double t) {
    return sbs::decoherence_factor(spins, t);
  }, py::arg("spins"), py::arg("t"), "Product of per-spin decoherence factors over the given spins.");
  m.def("macrofraction_fidelity", [](const std::vector<sbs::SpinParams>& spins, double t) {
    return sbs::macrofraction_fidelity(std::span<const sbs::SpinParams>(spins), t);
  }, py::arg("spins"), py::arg("t"), "Branch fidelity B(t) of a macrofraction.");
  m.def("lln_exponents", [](const sbs::SpinParams& p, double t) {
    const auto e = sbs::lln_exponents(p, t);
    return py::make_tuple(e.kappa, e.chi);
  }, py::arg("spin"), py::arg("t"));
  m.def("time_scales", [](std::size_t total_spins, std::size_t macro_size, double observed_fraction, double g2bar) {
    const auto ts = sbs::time_scales(total_spins, macro_size, observed_fraction, g2bar);
    py::dict d;
    d["t_broadcast"] = ts.t_broadcast;
    d["t_decoherence"] = ts.t_decoherence;
    d["ratio_sq"] = ts.ratio_sq;
    return d;
  }, py::arg("total_spins"), py::arg("macro_size"), py::arg("observed_fraction"), py::arg("g2bar"));

  m.def("local_success_probability", &sbs::local_success_probability, py::arg("spin"), py::arg("t"));
  m.def("majority_success", &sbs::majority_success, py::arg("n_m"), py::arg("p"));
  m.def("majority_success_heterogeneous", [](const std::vector<double>& probs) {
    return sbs::majority_success_heterogeneous(probs);
  }, py::arg("probs"));
  m.def("chernoff_bound", &sbs::chernoff_bound, py::arg("n_m"), py::arg("s_bar"));
  m.def("broadcast_entropy_bound", &sbs::broadcast_entropy_bound, py::arg("x"), py::arg("d_s") = 2);

  m.def("default_config", [] { return sbs::to_json_text(sbs::ScenarioConfig{}); },
        "Full default configuration as JSON text.");
  m.def("scenario_names", &sbs::scenario_names);
  m.def("run_scenario", [](const std::string& name, const std::string& config_json, const std::filesystem::path& out_dir) {
    const sbs::ScenarioConfig config = config_json.empty() ? sbs::ScenarioConfig{} : sbs::parse_config(config_json);
    sbs::RunResult result;
    {
      py::gil_scoped_release release;
      result = sbs::run_scenario(name, config, out_dir);
    }
    std::vector<std::string> outputs;
    for (const auto& p : result.outputs) outputs.push_back(p.generic_string());
    return py::make_tuple(static_cast<int>(result.status), outputs, result.message);
  }, py::arg("name"), py::arg("config_json") = "", py::arg("out_dir") = "out",
     "Runs a scenario; returns (exit_code, output files, message).");

  m.def("verify", [](std::uint64_t seed, std::size_t qubit_instances, std::size_t late_instances,
                     std::size_t qutrit_instances) {
    sbs::VerifyOptions opt;
    opt.seed = seed;
    opt.qubit_instances = qubit_instances;
    opt.late_instances = late_instances;
    opt.qutrit_instances = qutrit_instances;
    sbs::VerifyReport rep;
    {
      py::gil_scoped_release release;
      rep = sbs::run_verification(opt);
    }
    py::dict out;
    for (const auto& s : rep.suites) {
      py::dict d;
      d["passed"] = s.passed;
      d["failed"] = s.failed;
      d["worst_margin"] = s.worst_margin;
      out[py::str(s.name)] = d;
    }
    return out;
  }, py::arg("seed") = 20240917, py::arg("qubit_instances") = 200, py::arg("late_instances") = 100,
     py::arg("qutrit_instances") = 50, "Runs the oracle suites; returns {suite: {passed, failed, worst_margin}}.");
}
