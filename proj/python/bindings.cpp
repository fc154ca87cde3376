#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rflab/config.hpp"
#include "rflab/error.hpp"
#include "rflab/euler.hpp"
#include "rflab/experiments.hpp"
#include "rflab/gflow.hpp"
#include "rflab/relenergy.hpp"
#include "rflab/riesz.hpp"
#include "rflab/thermo.hpp"

namespace py = pybind11;
using namespace rflab;

namespace {

ConvBackend backend_from(const std::string& name) {
  if (name == "direct") return ConvBackend::Direct;
  if (name == "spectral") return ConvBackend::Spectral;
  throw ParameterError("backend must be `direct` or `spectral`");
}

State make_state(const PeriodicGrid& grid, const ScalarField& rho, const std::vector<ScalarField>& mom) {
  State s = State::at_rest(grid, rho);
  if (!mom.empty()) {
    if (static_cast<int>(mom.size()) != grid.dim()) throw ParameterError("momentum needs one list per dimension");
    s.mom.comp = mom;
  }
  return s;
}

py::dict ledger_dict(const EnergyLedger& l) {
  py::dict d;
  d["t"] = l.times;
  d["mass"] = l.mass;
  d["kinetic"] = l.kinetic;
  d["internal"] = l.internal;
  d["interaction"] = l.interaction;
  d["dissipation_integral"] = l.dissipation_integral;
  return d;
}

py::dict run_experiment(const std::string& kind_text, const std::string& config_text, const std::string& out_dir) {
  const ExperimentKind kind = parse_kind(kind_text);
  ConfigFile cfg = ConfigFile::parse(config_text);
  if (!out_dir.empty()) cfg.set("output_dir", out_dir);
  const ExperimentSpec spec = ExperimentSpec::from_config(cfg, kind);
  Bundle bundle;
  switch (kind) {
    case ExperimentKind::Certify: bundle = certify_bundle(spec, run_certify(spec)); break;
    case ExperimentKind::Audit: bundle = audit_bundle(spec, run_audits(spec)); break;
    case ExperimentKind::Convergence: bundle = convergence_bundle(spec, run_convergence(spec)); break;
    case ExperimentKind::Wsu: {
      const auto cert = load_certificate(spec);
      bundle = wsu_bundle(spec, cert, run_wsu(spec, cert));
      break;
    }
    case ExperimentKind::RelaxationSweep: {
      const auto cert = load_certificate(spec);
      bundle = sweep_bundle(spec, cert, run_relaxation_sweep(spec, cert));
      break;
    }
  }
  if (!out_dir.empty()) write_bundle(out_dir, bundle);
  py::dict files;
  for (const auto& [name, content] : bundle.files) files[py::str(name)] = content;
  py::dict d;
  d["files"] = files;
  d["all_pass"] = bundle.all_pass;
  d["warnings"] = bundle.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rflab, m) {
  m.doc() = "Euler-Riesz solvers, Riesz convolutions and relative-energy diagnostics";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<GridMismatch>(m, "GridMismatch", PyExc_ValueError);
  py::register_exception<SolverAbort>(m, "SolverAbort", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<PeriodicGrid>(m, "PeriodicGrid")
      .def(py::init<int, int, double>(), py::arg("dim"), py::arg("cells_per_axis"), py::arg("length") = 1.0)
      .def_property_readonly("dim", &PeriodicGrid::dim)
      .def_property_readonly("cells_per_axis", &PeriodicGrid::cells_per_axis)
      .def_property_readonly("length", &PeriodicGrid::length)
      .def_property_readonly("cell_size", &PeriodicGrid::cell_size)
      .def_property_readonly("size", &PeriodicGrid::size)
      .def("center", &PeriodicGrid::center);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("kappa", &ModelParams::kappa)
      .def_readwrite("nu", &ModelParams::nu)
      .def_readwrite("epsilon", &ModelParams::epsilon)
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("sign", &ModelParams::sign)
      .def("beta", &ModelParams::beta)
      .def("validate", &ModelParams::validate);

  py::class_<KernelTable>(m, "KernelTable")
      .def_static("build", &KernelTable::build)
      .def_property_readonly("values", &KernelTable::values)
      .def_property_readonly("fourier_symbol", &KernelTable::fourier_symbol)
      .def("symbol_at", &KernelTable::symbol_at, py::arg("kx"), py::arg("ky") = 0);

  m.def(
      "convolve",
      [](const KernelTable& k, const ScalarField& f, const std::string& backend) {
        return convolve(k, f, backend_from(backend));
      },
      py::arg("kernel"), py::arg("f"), py::arg("backend") = "spectral");
  m.def(
      "grad_convolve",
      [](const KernelTable& k, const ScalarField& f, const std::string& backend) {
        return grad_convolve(k, f, backend_from(backend)).comp;
      },
      py::arg("kernel"), py::arg("f"), py::arg("backend") = "direct");
  m.def(
      "riesz_potential",
      [](const PeriodicGrid& g, const ScalarField& f, double beta) { return riesz_potential(g, f, beta); },
      py::arg("grid"), py::arg("f"), py::arg("beta"));
  m.def(
      "hls_check",
      [](const ScalarField& f, const ModelParams& p, const PeriodicGrid& g) {
        const HlsReport r = hls_check(f, p, g);
        py::dict d;
        d["lhs"] = r.lhs;
        d["rhs_p"] = r.rhs_p;
        d["rhs_interp"] = r.rhs_interp;
        d["ratio_hls"] = r.ratio_hls;
        d["ratio_interp"] = r.ratio_interp;
        return d;
      },
      py::arg("f"), py::arg("params"), py::arg("grid"));

  m.def("h_energy", &h_energy);
  m.def("pressure", &pressure);
  m.def("h_relative", &h_relative, py::arg("rho"), py::arg("rho_bar"), py::arg("gamma"));
  m.def("p_relative", &p_relative, py::arg("rho"), py::arg("rho_bar"), py::arg("gamma"));

  m.def(
      "run_euler",
      [](const PeriodicGrid& grid, const ModelParams& p, const ScalarField& rho, const std::vector<ScalarField>& mom,
         double t_end, double cfl, bool scaled, const std::string& reconstruction) {
        EulerConfig cfg;
        cfg.params = p;
        cfg.t_end = t_end;
        cfg.cfl = cfl;
        cfg.scaled = scaled;
        cfg.reconstruction = reconstruction == "linear" ? Reconstruction::Linear : Reconstruction::Constant;
        const KernelTable kernel = KernelTable::build(p, grid);
        const EulerRun run = run_euler(make_state(grid, rho, mom), cfg, kernel);
        py::dict d;
        d["rho"] = run.snapshots.back().rho;
        d["mom"] = run.snapshots.back().mom.comp;
        d["time"] = run.snapshots.back().time;
        d["steps"] = run.steps;
        d["ledger"] = ledger_dict(run.ledger);
        return d;
      },
      py::arg("grid"), py::arg("params"), py::arg("rho"), py::arg("mom") = std::vector<ScalarField>{},
      py::arg("t_end") = 0.1, py::arg("cfl") = 0.4, py::arg("scaled") = false, py::arg("reconstruction") = "constant");

  m.def(
      "run_gflow",
      [](const PeriodicGrid& grid, const ModelParams& p, const ScalarField& rho, double t_end, double cfl,
         double snapshot_interval) {
        GflowConfig cfg;
        cfg.params = p;
        cfg.t_end = t_end;
        cfg.cfl = cfl;
        cfg.snapshot_interval = snapshot_interval;
        const KernelTable kernel = KernelTable::build(p, grid);
        const GflowRun run = run_gflow(rho, cfg, kernel);
        py::dict d;
        d["times"] = run.times;
        d["snapshots"] = run.snapshots;
        d["steps"] = run.steps;
        d["ledger"] = ledger_dict(gf_energy_ledger(run, p, kernel));
        return d;
      },
      py::arg("grid"), py::arg("params"), py::arg("rho"), py::arg("t_end") = 0.01, py::arg("cfl") = 0.4,
      py::arg("snapshot_interval") = 0.0);

  m.def(
      "relative_energy",
      [](const PeriodicGrid& grid, const ModelParams& p, const ScalarField& rho, const std::vector<ScalarField>& mom,
         const ScalarField& rho_bar, const std::vector<ScalarField>& u_bar, bool relaxation) {
        const KernelTable kernel = KernelTable::build(p, grid);
        VectorField ub;
        ub.comp = u_bar;
        const auto parts = relative_energy(make_state(grid, rho, mom), rho_bar, ub, p, kernel,
                                           relaxation ? RelativeMode::Relaxation : RelativeMode::WeakStrong);
        py::dict d;
        d["kinetic"] = parts.kinetic;
        d["internal"] = parts.internal;
        d["interaction"] = parts.interaction;
        d["total"] = parts.total();
        return d;
      },
      py::arg("grid"), py::arg("params"), py::arg("rho"), py::arg("mom"), py::arg("rho_bar"), py::arg("u_bar"),
      py::arg("relaxation") = false);

  m.def(
      "gronwall_fit",
      [](const std::vector<double>& t, const std::vector<double>& psi) {
        const auto fit = gronwall_fit(t, psi);
        return py::make_tuple(fit.fitted_C, fit.bound_violated, fit.note);
      },
      py::arg("times"), py::arg("psi"));

  m.def("run_experiment", &run_experiment, py::arg("kind"), py::arg("config_text"), py::arg("out_dir") = "",
        "Runs one experiment kind (wsu, sweep, audit, certify, converge) from config text and returns its bundle.");
}
