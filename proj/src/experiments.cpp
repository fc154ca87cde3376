#include "rflab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rflab/ensembles.hpp"
#include "rflab/error.hpp"
#include "rflab/io.hpp"
#include "rflab/riesz.hpp"

namespace rflab {

using ojson = nlohmann::ordered_json;

std::string_view kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Wsu: return "wsu";
    case ExperimentKind::RelaxationSweep: return "relaxation_sweep";
    case ExperimentKind::Audit: return "hls_audit";
    case ExperimentKind::Certify: return "cstar_certify";
    case ExperimentKind::Convergence: return "solver_convergence";
  }
  return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
  if (name == "wsu") return ExperimentKind::Wsu;
  if (name == "sweep" || name == "relaxation_sweep") return ExperimentKind::RelaxationSweep;
  if (name == "audit" || name == "hls_audit") return ExperimentKind::Audit;
  if (name == "certify" || name == "cstar_certify") return ExperimentKind::Certify;
  if (name == "converge" || name == "solver_convergence") return ExperimentKind::Convergence;
  throw ConfigError("unknown experiment kind `" + std::string(name) + "`");
}

// ---------------------------------------------------------------- spec

ExperimentSpec ExperimentSpec::defaults(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  switch (kind) {
    case ExperimentKind::RelaxationSweep:
      // Diffusive time scale of order one for the lowest mode.
      s.length = 2.0 * 3.141592653589793;
      s.t_end = 1.0;
      s.snapshot_interval = 0.05;
      s.cfl = 0.25;
      s.reconstruction = Reconstruction::Linear;
      s.rho_amplitude = 0.2;
      break;
    case ExperimentKind::Wsu:
      // Smooth enough that the reference stays classical over the horizon.
      s.reconstruction = Reconstruction::Linear;
      s.max_mode = 1;
      s.rho_amplitude = 0.1;
      s.u_amplitude = 0.1;
      break;
    case ExperimentKind::Convergence:
      s.dim = 1;
      s.cells = 32;
      s.t_end = 0.1;
      s.snapshot_interval = 0.0;
      break;
    default:
      break;
  }
  return s;
}

namespace {

std::vector<int> to_cells(const std::vector<double>& v) {
  std::vector<int> out;
  for (double x : v) {
    if (x != std::floor(x) || x < 1.0) throw ConfigError("converge_cells must hold positive integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

bool strictly_decreasing_positive(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) return false;
    if (i > 0 && !(v[i] < v[i - 1])) return false;
  }
  return true;
}

}  // namespace

ExperimentSpec ExperimentSpec::from_config(const ConfigFile& cfg, ExperimentKind kind) {
  ExperimentSpec s = defaults(kind);
  s.dim = cfg.get_int("dim", s.dim);
  s.cells = cfg.get_int("cells", s.cells);
  s.length = cfg.get_real("length", s.length);
  s.params.gamma = cfg.get_real("gamma", s.params.gamma);
  s.params.alpha = cfg.get_real("alpha", s.params.alpha);
  s.params.sign = cfg.get_int("sign", s.params.sign);
  s.params.nu = cfg.get_real("nu", s.params.nu);
  s.kappa_given = cfg.has("kappa");
  s.params.kappa = cfg.get_real("kappa", s.params.kappa);
  s.kappa_fraction = cfg.get_real("kappa_fraction", s.kappa_fraction);
  s.cfl = cfg.get_real("cfl", s.cfl);
  s.gf_cfl = cfg.get_real("gf_cfl", s.gf_cfl);
  s.t_end = cfg.get_real("t_end", s.t_end);
  s.gf_t_end = cfg.get_real("gf_t_end", s.gf_t_end);
  s.snapshot_interval = cfg.get_real("snapshot_interval", s.snapshot_interval);

  const std::string friction = cfg.get_string("friction", "implicit");
  if (friction == "implicit") {
    s.friction = FrictionTreatment::ImplicitSplit;
  } else if (friction == "explicit") {
    s.friction = FrictionTreatment::Explicit;
  } else {
    throw ConfigError("friction must be `implicit` or `explicit`");
  }
  const std::string recon =
      cfg.get_string("reconstruction", s.reconstruction == Reconstruction::Linear ? "linear" : "constant");
  if (recon == "constant") {
    s.reconstruction = Reconstruction::Constant;
  } else if (recon == "linear") {
    s.reconstruction = Reconstruction::Linear;
  } else {
    throw ConfigError("reconstruction must be `constant` or `linear`");
  }

  s.rho_mean = cfg.get_real("rho_mean", s.rho_mean);
  s.rho_amplitude = cfg.get_real("rho_amplitude", s.rho_amplitude);
  s.u_amplitude = cfg.get_real("u_amplitude", s.u_amplitude);
  s.max_mode = cfg.get_int("max_mode", s.max_mode);
  s.delta_list = cfg.get_list("delta_list", s.delta_list);
  s.mode_seed = cfg.get_u64("mode_seed", s.mode_seed);
  s.strong_refine = cfg.get_int("strong_refine", s.strong_refine);
  s.epsilon_list = cfg.get_list("epsilon_list", s.epsilon_list);
  s.ensemble_size = cfg.get_u64("ensemble_size", s.ensemble_size);
  s.holdout_size = cfg.get_u64("holdout_size", s.holdout_size);
  s.ensemble_delta = cfg.get_real("ensemble_delta", s.ensemble_delta);
  s.ensemble_Mbar = cfg.get_real("ensemble_mbar", s.ensemble_Mbar);
  s.audit_fields = cfg.get_u64("audit_fields", s.audit_fields);
  s.zero_ensemble = cfg.get_bool("zero_ensemble", s.zero_ensemble);
  s.converge_cells = cfg.get_list("converge_cells", s.converge_cells);
  s.reference_factor = cfg.get_int("reference_factor", s.reference_factor);
  s.certificate_path = cfg.get_string("certificate", s.certificate_path);
  s.output_dir = cfg.get_string("output_dir", s.output_dir);
  s.seed = cfg.get_u64("seed", s.seed);
  cfg.reject_unknown();
  s.validate();
  return s;
}

void ExperimentSpec::validate() const {
  try {
    (void)grid();
    ModelParams p = params;
    p.validate(dim);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (cells < 4) throw ConfigError("cells must be at least 4");
  if (!(cfl > 0.0 && cfl <= 1.0) || !(gf_cfl > 0.0 && gf_cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  if (!(t_end > 0.0) || !(gf_t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(snapshot_interval >= 0.0)) throw ConfigError("snapshot_interval must be non-negative");
  if (!(kappa_fraction >= 0.0 && kappa_fraction < 1.0)) throw ConfigError("kappa_fraction must lie in [0, 1)");
  if (!(rho_mean > 0.0) || !(rho_amplitude >= 0.0 && rho_amplitude < 1.0) || !(u_amplitude >= 0.0)) {
    throw ConfigError("initial data needs rho_mean > 0, 0 <= rho_amplitude < 1, u_amplitude >= 0");
  }
  if (max_mode < 1) throw ConfigError("max_mode must be at least 1");
  if (!strictly_decreasing_positive(delta_list)) throw ConfigError("delta_list must be strictly decreasing and positive");
  for (double d : delta_list) {
    if (d >= 1.0) throw ConfigError("delta_list entries must be below 1");
  }
  if (!strictly_decreasing_positive(epsilon_list)) {
    throw ConfigError("epsilon_list must be strictly decreasing and positive");
  }
  if (strong_refine < 1) throw ConfigError("strong_refine must be at least 1");
  if (!(ensemble_delta > 0.0 && ensemble_delta <= ensemble_Mbar)) {
    throw ConfigError("need 0 < ensemble_delta <= ensemble_mbar");
  }
  if (ensemble_size == 0) throw ConfigError("ensemble_size must be positive");
  if (reference_factor < 2) throw ConfigError("reference_factor must be at least 2");
  const auto cc = to_cells(converge_cells);
  if (cc.size() < 2) throw ConfigError("converge_cells needs at least two levels");
  for (std::size_t i = 1; i < cc.size(); ++i) {
    if (cc[i] <= cc[i - 1]) throw ConfigError("converge_cells must be increasing");
  }
  const int ref = reference_factor * cc.back();
  for (int c : cc) {
    if (ref % c != 0) throw ConfigError("converge_cells must divide the reference resolution");
  }
}

namespace {

ojson spec_json(const ExperimentSpec& s) {
  ojson j;
  j["kind"] = std::string(kind_name(s.kind));
  j["dim"] = s.dim;
  j["cells"] = s.cells;
  j["length"] = s.length;
  j["gamma"] = s.params.gamma;
  j["alpha"] = s.params.alpha;
  j["sign"] = s.params.sign;
  j["nu"] = s.params.nu;
  if (s.kappa_given) j["kappa"] = s.params.kappa;
  j["kappa_fraction"] = s.kappa_fraction;
  j["cfl"] = s.cfl;
  j["gf_cfl"] = s.gf_cfl;
  j["t_end"] = s.t_end;
  j["gf_t_end"] = s.gf_t_end;
  j["snapshot_interval"] = s.snapshot_interval;
  j["friction"] = s.friction == FrictionTreatment::ImplicitSplit ? "implicit" : "explicit";
  j["reconstruction"] = s.reconstruction == Reconstruction::Linear ? "linear" : "constant";
  j["rho_mean"] = s.rho_mean;
  j["rho_amplitude"] = s.rho_amplitude;
  j["u_amplitude"] = s.u_amplitude;
  j["max_mode"] = s.max_mode;
  j["delta_list"] = s.delta_list;
  j["mode_seed"] = s.perturbation_seed();
  j["strong_refine"] = s.strong_refine;
  j["epsilon_list"] = s.epsilon_list;
  j["ensemble_size"] = s.ensemble_size;
  j["holdout_size"] = s.holdout_size;
  j["ensemble_delta"] = s.ensemble_delta;
  j["ensemble_mbar"] = s.ensemble_Mbar;
  j["audit_fields"] = s.audit_fields;
  j["zero_ensemble"] = s.zero_ensemble;
  j["converge_cells"] = to_cells(s.converge_cells);
  j["reference_factor"] = s.reference_factor;
  j["seed"] = s.seed;
  return j;
}

ojson cert_json(const KappaCertificate& c) { return ojson::parse(c.to_json()); }

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

template <class F>
std::string to_text(F&& write) {
  std::ostringstream ss;
  write(ss);
  return ss.str();
}

double l1_distance(std::span<const double> a, std::span<const double> b, const PeriodicGrid& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * grid.cell_volume();
}

}  // namespace

std::string ExperimentSpec::resolved_json() const { return spec_json(*this).dump(2); }

void write_bundle(const std::filesystem::path& dir, const Bundle& bundle) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : bundle.files) io::write_file_atomic(dir / name, content);
}

// ---------------------------------------------------------------- initial data

State smooth_initial_state(const PeriodicGrid& grid, const ExperimentSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  const ScalarField f = random_smooth_field(grid, rng, spec.max_mode, 1.0);
  ScalarField rho(grid.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = spec.rho_mean * (1.0 + spec.rho_amplitude * f[i]);
  State s = State::at_rest(grid, rho);
  for (int a = 0; a < grid.dim(); ++a) {
    const ScalarField g = random_smooth_field(grid, rng, spec.max_mode, 1.0);
    for (std::size_t i = 0; i < rho.size(); ++i) s.mom[a][i] = rho[i] * spec.u_amplitude * g[i];
  }
  return s;
}

State perturbed_state(const State& base, const PeriodicGrid& grid, double delta, int max_mode, std::uint64_t seed) {
  Rng rng(seed);
  const ScalarField eta = random_smooth_field(grid, rng, max_mode, 1.0);
  const VectorField u = velocity(base, vacuum_floor(base.rho, grid));
  State s = base;
  for (std::size_t i = 0; i < s.rho.size(); ++i) s.rho[i] = base.rho[i] * (1.0 + delta * eta[i]);
  for (int a = 0; a < grid.dim(); ++a) {
    const ScalarField w = random_smooth_field(grid, rng, max_mode, 1.0);
    for (std::size_t i = 0; i < s.rho.size(); ++i) s.mom[a][i] = s.rho[i] * (u[a][i] + delta * w[i]);
  }
  return s;
}

// ---------------------------------------------------------------- certificate

KappaCertificate load_certificate(const ExperimentSpec& spec) {
  const std::filesystem::path path = spec.certificate_path.empty()
                                         ? std::filesystem::path(spec.output_dir) / "certificate.json"
                                         : std::filesystem::path(spec.certificate_path);
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("no kappa certificate at `" + path.string() +
                      "`; run `rflab certify` with the same grid and model first");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return KappaCertificate::from_json(ss.str());
}

double certified_kappa(const ExperimentSpec& spec, const KappaCertificate& cert) {
  if (!cert.matches(spec.grid(), spec.params)) {
    throw ParameterError("kappa certificate was issued for a different grid or model");
  }
  const double kappa = spec.kappa_given ? spec.params.kappa : spec.kappa_fraction * cert.kappa_max;
  if (!(kappa < cert.kappa_max)) throw ParameterError("kappa lies outside the certified range");
  return kappa;
}

KappaCertificate run_certify(const ExperimentSpec& spec) {
  const PeriodicGrid grid = spec.grid();
  const KernelTable kernel = KernelTable::build(spec.params, grid);
  const auto ensemble =
      certification_ensemble(grid, spec.ensemble_delta, spec.ensemble_Mbar, spec.ensemble_size, spec.seed, true);
  KappaCertificate cert = estimate_c_star(ensemble, spec.params, kernel);
  cert.ensemble_seed = spec.seed;
  cert.params.kappa = spec.kappa_given ? spec.params.kappa : spec.kappa_fraction * cert.kappa_max;
  return cert;
}

Bundle certify_bundle(const ExperimentSpec& spec, const KappaCertificate& cert) {
  Bundle b;
  b.files.emplace_back("certificate.json", cert.to_json());
  ojson j;
  j["kind"] = std::string(kind_name(spec.kind));
  j["config"] = spec_json(spec);
  j["certificate"] = cert_json(cert);
  b.files.emplace_back("certify_summary.json", dump(j));
  return b;
}

// ---------------------------------------------------------------- wsu

namespace {

EulerConfig euler_config(const ExperimentSpec& spec, const ModelParams& p) {
  EulerConfig c;
  c.params = p;
  c.cfl = spec.cfl;
  c.t_end = spec.t_end;
  c.friction = spec.friction;
  c.reconstruction = spec.reconstruction;
  c.snapshot_interval = spec.snapshot_interval;
  return c;
}

}  // namespace

WsuResult run_wsu(const ExperimentSpec& spec, const KappaCertificate& cert) {
  const PeriodicGrid grid = spec.grid();
  WsuResult out;
  out.kappa = certified_kappa(spec, cert);
  ModelParams p = spec.params;
  p.kappa = out.kappa;
  p.epsilon = 0.0;
  const EulerConfig cfg = euler_config(spec, p);
  const KernelTable kernel = KernelTable::build(p, grid);

  State base;
  std::vector<StrongProxy> strong;
  if (spec.strong_refine == 1) {
    base = smooth_initial_state(grid, spec, spec.seed);
    for (const auto& s : run_euler(base, cfg, kernel).snapshots) strong.push_back(proxy_from_state(s, grid));
  } else {
    const PeriodicGrid fine(grid.dim(), grid.cells_per_axis() * spec.strong_refine, grid.length());
    const KernelTable fine_kernel = KernelTable::build(p, fine);
    const State fine0 = smooth_initial_state(fine, spec, spec.seed);
    base = restrict_state(fine0, fine, spec.strong_refine);
    for (const auto& s : run_euler(fine0, cfg, fine_kernel).snapshots) {
      strong.push_back(proxy_from_state(restrict_state(s, fine, spec.strong_refine), grid));
    }
  }

  out.zero_report = term_decomposition(run_euler(base, cfg, kernel).snapshots, strong, p, kernel,
                                       RelativeMode::WeakStrong);
  out.delta_list = spec.delta_list;
  for (double delta : spec.delta_list) {
    const State s0 = perturbed_state(base, grid, delta, spec.max_mode, spec.perturbation_seed());
    auto rep = term_decomposition(run_euler(s0, cfg, kernel).snapshots, strong, p, kernel, RelativeMode::WeakStrong);
    out.sup_psi.push_back(rep.sup());
    out.fitted_C.push_back(rep.fitted_C);
    out.reports.push_back(std::move(rep));
  }
  for (std::size_t i = 0; i + 1 < out.sup_psi.size(); ++i) {
    out.scaling_ratio.push_back(out.sup_psi[i] / out.sup_psi[i + 1]);
  }
  return out;
}

Bundle wsu_bundle(const ExperimentSpec& spec, const KappaCertificate& cert, const WsuResult& r) {
  Bundle b;
  ojson j;
  j["kind"] = std::string(kind_name(spec.kind));
  j["config"] = spec_json(spec);
  j["certificate"] = cert_json(cert);
  j["kappa"] = r.kappa;
  j["delta_zero"] = {{"sup_psi", r.zero_report.sup()},
                     {"bound_violated", r.zero_report.bound_violated},
                     {"note", r.zero_report.bound_violated ? "bound trivially violated" : ""}};
  j["delta_list"] = r.delta_list;
  j["sup_psi"] = r.sup_psi;
  j["fitted_C"] = r.fitted_C;
  j["scaling_ratio"] = r.scaling_ratio;
  bool violated = r.zero_report.bound_violated;
  for (const auto& rep : r.reports) violated = violated || rep.bound_violated;
  j["bound_violated"] = violated;
  b.all_pass = !violated;
  b.files.emplace_back("wsu_summary.json", dump(j));
  b.files.emplace_back("relenergy_delta0.csv", to_text([&](std::ostream& o) { r.zero_report.write_csv(o); }));
  for (std::size_t i = 0; i < r.reports.size(); ++i) {
    b.files.emplace_back("relenergy_delta" + std::to_string(i + 1) + ".csv",
                         to_text([&](std::ostream& o) { r.reports[i].write_csv(o); }));
  }
  return b;
}

// ---------------------------------------------------------------- relaxation sweep

SweepResult run_relaxation_sweep(const ExperimentSpec& spec, const KappaCertificate& cert) {
  const PeriodicGrid grid = spec.grid();
  SweepResult out;
  out.kappa = certified_kappa(spec, cert);
  ModelParams p = spec.params;
  p.kappa = out.kappa;
  p.nu = 0.0;
  const KernelTable kernel = KernelTable::build(p, grid);

  GflowConfig gc;
  gc.params = p;
  gc.cfl = spec.gf_cfl;
  gc.t_end = spec.t_end;
  gc.snapshot_interval = spec.snapshot_interval;
  const ScalarField rho0 = smooth_initial_state(grid, spec, spec.seed).rho;
  out.reference = run_gflow(rho0, gc, kernel);
  out.proxy = reconstruct_strong_proxy(out.reference, p, kernel);

  // Well-prepared data: the weak run starts from the strong state.
  State s0 = State::at_rest(grid, rho0);
  for (int a = 0; a < grid.dim(); ++a) {
    for (std::size_t i = 0; i < rho0.size(); ++i) s0.mom[a][i] = rho0[i] * out.proxy.front().u_bar[a][i];
  }

  std::vector<double> sup, phi0;
  for (double eps : spec.epsilon_list) {
    ModelParams pe = p;
    pe.epsilon = eps;
    EulerConfig cfg = euler_config(spec, pe);
    cfg.scaled = true;
    const EulerRun run = run_euler(s0, cfg, kernel);
    auto rep = term_decomposition(run.snapshots, out.proxy, pe, kernel, RelativeMode::Relaxation);
    double j4 = 0.0;
    for (double v : rep.terms[3]) j4 = std::max(j4, std::abs(v));
    out.j4_sup.push_back(j4);
    sup.push_back(rep.sup());
    phi0.push_back(rep.psi_or_phi.front());
    out.reports.push_back(std::move(rep));
  }
  out.fit = relaxation_fit(spec.epsilon_list, sup, phi0, spec.t_end);
  return out;
}

Bundle sweep_bundle(const ExperimentSpec& spec, const KappaCertificate& cert, const SweepResult& r) {
  Bundle b;
  ojson j;
  j["kind"] = std::string(kind_name(spec.kind));
  j["config"] = spec_json(spec);
  j["certificate"] = cert_json(cert);
  j["kappa"] = r.kappa;
  j["fit"] = ojson::parse(r.fit.to_json());
  j["j4_sup"] = r.j4_sup;
  ojson breakdown = ojson::array();
  for (const auto& rep : r.reports) {
    ojson row;
    row["epsilon"] = rep.epsilon;
    row["sup_phi"] = rep.sup();
    row["friction_dissipation"] = rep.friction_dissipation.back();
    row["J1"] = rep.terms[0].back();
    row["J2"] = rep.terms[1].back();
    row["J3"] = rep.terms[2].back();
    row["J4"] = rep.terms[3].back();
    breakdown.push_back(row);
  }
  j["breakdown"] = breakdown;
  b.all_pass = !r.fit.bound_violated;
  b.files.emplace_back("sweep_summary.json", dump(j));
  for (std::size_t i = 0; i < r.reports.size(); ++i) {
    b.files.emplace_back("relenergy_eps" + std::to_string(i + 1) + ".csv",
                         to_text([&](std::ostream& o) { r.reports[i].write_csv(o); }));
  }
  ModelParams p = spec.params;
  p.kappa = r.kappa;
  const KernelTable kernel = KernelTable::build(p, spec.grid());
  b.files.emplace_back("gf_ledger.csv",
                       to_text([&](std::ostream& o) { gf_energy_ledger(r.reference, p, kernel).write_csv(o); }));
  b.files.emplace_back("strong_proxy.csv",
                       to_text([&](std::ostream& o) { write_proxy_csv(o, r.proxy, spec.grid()); }));
  return b;
}

// ---------------------------------------------------------------- audits

AuditResult run_audits(const ExperimentSpec& spec) {
  const PeriodicGrid grid = spec.grid();
  ModelParams p = spec.params;
  const KernelTable kernel = KernelTable::build(p, grid);
  const int d = grid.dim();
  const double beta = p.beta(d);
  AuditResult res;
  ojson audits;

  auto record = [&](const std::string& name, bool pass, ojson detail) {
    detail["pass"] = pass;
    audits[name] = detail;
    if (!pass) {
      res.all_pass = false;
      res.failures.push_back(name + ": " + detail.dump());
    }
  };

  std::vector<ScalarField> fields;
  if (spec.zero_ensemble) {
    fields.assign(spec.audit_fields, ScalarField(grid.size(), 0.0));
  } else {
    fields = random_nonnegative_fields(grid, 2 * spec.audit_fields, spec.seed);
  }
  bool degenerate = true;
  for (const auto& f : fields) {
    for (double v : f) degenerate = degenerate && v == 0.0;
  }

  if (degenerate) {
    res.warnings.push_back("degenerate ensemble");
  } else {
    // HLS chain, with the stability of the first inequality under ensemble doubling.
    double max_hls_half = 0.0, max_hls = 0.0, max_interp = 0.0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const HlsReport r = hls_check(fields[k], p, grid);
      max_hls = std::max(max_hls, r.ratio_hls);
      if (k < fields.size() / 2) max_hls_half = max_hls;
      max_interp = std::max(max_interp, r.ratio_interp);
    }
    const double change = std::abs(max_hls / max_hls_half - 1.0);
    record("hls_interpolation", max_interp <= 1.0 + 1e-10, {{"max_ratio", max_interp}, {"tolerance", 1e-10}});
    record("hls_ratio_stability", std::isfinite(max_hls) && change < 0.1,
           {{"max_ratio_half", max_hls_half}, {"max_ratio_full", max_hls}, {"relative_change", change}});

    // Backend equivalence and symmetry of f -> W*f.
    double backend = 0.0, symmetry = 0.0;
    const std::size_t n = spec.audit_fields;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& f = fields[k];
      const auto& g = fields[(k + 1) % fields.size()];
      const ScalarField wd = convolve(kernel, f, ConvBackend::Direct);
      const ScalarField ws = convolve(kernel, f, ConvBackend::Spectral);
      double diff = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < wd.size(); ++i) {
        diff = std::max(diff, std::abs(wd[i] - ws[i]));
        scale = std::max(scale, std::abs(wd[i]));
      }
      if (scale > 0.0) backend = std::max(backend, diff / scale);
      const double a = inner(f, convolve(kernel, g, ConvBackend::Direct), grid);
      const double b = inner(wd, g, grid);
      const double m = std::max(std::abs(a), std::abs(b));
      if (m > 0.0) symmetry = std::max(symmetry, std::abs(a - b) / m);
    }
    record("backend_equivalence", backend <= 1e-10, {{"max_relative_difference", backend}, {"tolerance", 1e-10}});
    record("self_adjointness", symmetry <= 1e-10, {{"max_relative_defect", symmetry}, {"tolerance", 1e-10}});

    // Pointwise |gradW*f| <= I_(beta-1) f, meaningful for beta > 1.
    if (beta > 1.0) {
      double worst = -1e300;
      for (std::size_t k = 0; k < n; ++k) {
        const VectorField g = grad_convolve(kernel, fields[k], ConvBackend::Direct);
        const ScalarField bound = riesz_potential(grid, fields[k], beta - 1.0, ConvBackend::Direct);
        for (std::size_t i = 0; i < bound.size(); ++i) {
          double norm2 = 0.0;
          for (int a = 0; a < d; ++a) norm2 += g[a][i] * g[a][i];
          worst = std::max(worst, std::sqrt(norm2) - bound[i]);
        }
      }
      record("gradient_bound", worst <= 1e-9, {{"max_excess", worst}, {"tolerance", 1e-9}});
    } else {
      res.warnings.push_back("gradient bound audit skipped: beta <= 1");
    }
  }

  // Pressure / internal-energy gap identity on random triples.
  {
    Rng rng(spec.seed + 17);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double gamma = rng.uniform(1.05, 4.0);
      const double rho = rng.uniform(0.0, 5.0);
      const double rho_bar = rng.uniform(0.05, 5.0);
      const double lhs = p_relative(rho, rho_bar, gamma);
      const double rhs = (gamma - 1.0) * h_relative(rho, rho_bar, gamma);
      const double m = std::max(std::abs(lhs), std::abs(rhs));
      if (m > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / m);
    }
    record("pressure_identity", worst <= 1e-12, {{"max_relative_defect", worst}, {"tolerance", 1e-12}});
  }

  // Lower-bound constants of h(rho|rho_bar).
  {
    const auto c = fit_bound_constants(p.gamma, spec.ensemble_delta, spec.ensemble_Mbar);
    const double ratio = audit_bound_constants(c, p.gamma, 400);
    record("bregman_bound_constants", ratio >= 1.0,
           {{"R", c.R}, {"C1", c.C1}, {"C2", c.C2}, {"min_ratio", ratio}});
  }

  // Empirical C*: certificate on one ensemble, zero violations on a disjoint holdout.
  if (!degenerate) {
    const auto ensemble =
        certification_ensemble(grid, spec.ensemble_delta, spec.ensemble_Mbar, spec.ensemble_size, spec.seed, true);
    const KappaCertificate cert = estimate_c_star(ensemble, p, kernel);
    const double kappa = spec.kappa_fraction * cert.kappa_max;
    const double lambda = cert.lambda(kappa);
    ModelParams pk = p;
    pk.kappa = kappa;
    const auto holdout = certification_ensemble(grid, spec.ensemble_delta, spec.ensemble_Mbar, spec.holdout_size,
                                                spec.seed + 7919, false);
    std::size_t violations = 0;
    double min_margin = 1e300;
    for (const auto& pair : holdout) {
      const double rpe = relative_potential_energy(pair.rho, pair.rho_bar, pk, kernel);
      double hint = 0.0;
      for (std::size_t i = 0; i < pair.rho.size(); ++i) hint += h_relative(pair.rho[i], pair.rho_bar[i], p.gamma);
      hint *= grid.cell_volume();
      if (hint <= 0.0) continue;
      const double margin = rpe / hint - lambda;
      min_margin = std::min(min_margin, margin);
      if (rpe < 0.0 || margin < -1e-12) ++violations;
    }
    record("c_star_holdout", violations == 0,
           {{"c_star_emp", cert.c_star_emp},
            {"kappa_max", cert.kappa_max},
            {"kappa", kappa},
            {"lambda", lambda},
            {"holdout_size", holdout.size()},
            {"violations", violations},
            {"min_margin", min_margin}});
  }

  ojson j;
  j["all_pass"] = res.all_pass;
  j["warnings"] = res.warnings;
  j["failures"] = res.failures;
  j["audits"] = audits;
  j["config"] = spec_json(spec);
  res.json = dump(j);
  return res;
}

Bundle audit_bundle(const ExperimentSpec&, const AuditResult& result) {
  Bundle b;
  b.all_pass = result.all_pass;
  b.warnings = result.warnings;
  b.files.emplace_back("audit.json", result.json);
  return b;
}

// ---------------------------------------------------------------- convergence

ConvergenceResult run_convergence(const ExperimentSpec& spec) {
  const auto levels = to_cells(spec.converge_cells);
  const int ref_cells = spec.reference_factor * levels.back();
  ModelParams p = spec.params;
  p.kappa = 0.0;
  p.nu = 0.0;
  p.epsilon = 0.0;

  ConvergenceResult out;
  {
    EulerConfig cfg = euler_config(spec, p);
    cfg.snapshot_interval = 0.0;
    cfg.reconstruction = Reconstruction::Constant;
    auto solve = [&](int n) {
      const PeriodicGrid g(spec.dim, n, spec.length);
      return std::make_pair(g, run_euler(smooth_initial_state(g, spec, spec.seed), cfg, KernelTable::build(p, g))
                                   .snapshots.back()
                                   .rho);
    };
    const auto [ref_grid, ref] = solve(ref_cells);
    std::vector<double> h;
    for (int n : levels) {
      const auto [g, rho] = solve(n);
      out.euler.cells.push_back(n);
      out.euler.l1_error.push_back(l1_distance(rho, restrict_average(ref, ref_grid, ref_cells / n), g));
      h.push_back(g.cell_size());
    }
    out.euler.observed_order = loglog_slope(h, out.euler.l1_error);
  }
  {
    GflowConfig cfg;
    cfg.params = p;
    cfg.cfl = spec.gf_cfl;
    cfg.t_end = spec.gf_t_end;
    auto solve = [&](int n) {
      const PeriodicGrid g(spec.dim, n, spec.length);
      return std::make_pair(
          g, run_gflow(smooth_initial_state(g, spec, spec.seed).rho, cfg, KernelTable::build(p, g)).snapshots.back());
    };
    const auto [ref_grid, ref] = solve(ref_cells);
    std::vector<double> h;
    for (int n : levels) {
      const auto [g, rho] = solve(n);
      out.gflow.cells.push_back(n);
      out.gflow.l1_error.push_back(l1_distance(rho, restrict_average(ref, ref_grid, ref_cells / n), g));
      h.push_back(g.cell_size());
    }
    out.gflow.observed_order = loglog_slope(h, out.gflow.l1_error);
  }
  return out;
}

Bundle convergence_bundle(const ExperimentSpec& spec, const ConvergenceResult& r) {
  Bundle b;
  ojson j;
  j["kind"] = std::string(kind_name(spec.kind));
  j["config"] = spec_json(spec);
  for (const auto& [name, series] : {std::pair{"euler", &r.euler}, std::pair{"gflow", &r.gflow}}) {
    j[name] = {{"cells", series->cells},
               {"l1_error", series->l1_error},
               {"observed_order", series->observed_order}};
  }
  b.files.emplace_back("convergence.json", dump(j));
  return b;
}

}  // namespace rflab
