#pragma once

// Experiment orchestration behind the rflab command line: config resolution,
// the weak-strong and relaxation studies, inequality audits, the kappa
// certificate and solver self-convergence.  Every run returns its numbers and
// a Bundle of files that embeds the resolved config (and certificate).

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rflab/config.hpp"
#include "rflab/euler.hpp"
#include "rflab/fields.hpp"
#include "rflab/gflow.hpp"
#include "rflab/relenergy.hpp"
#include "rflab/thermo.hpp"

namespace rflab {

enum class ExperimentKind { Wsu, RelaxationSweep, Audit, Certify, Convergence };

/// wsu, relaxation_sweep, hls_audit, cstar_certify, solver_convergence.
std::string_view kind_name(ExperimentKind kind);
/// Accepts the command names (wsu, sweep, audit, certify, converge) and kind_name values.
ExperimentKind parse_kind(std::string_view name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Wsu;
  int dim = 2;
  int cells = 64;
  double length = 1.0;
  /// kappa is taken as kappa_fraction * kappa_max unless the config sets it.
  ModelParams params;
  double kappa_fraction = 0.5;
  bool kappa_given = false;

  double cfl = 0.4;
  double gf_cfl = 0.4;
  double t_end = 0.5;
  /// Horizon of the gradient-flow runs in the convergence study.
  double gf_t_end = 0.01;
  double snapshot_interval = 0.05;
  FrictionTreatment friction = FrictionTreatment::ImplicitSplit;
  Reconstruction reconstruction = Reconstruction::Constant;

  // Smooth initial data: rho = rho_mean (1 + rho_amplitude f), u = u_amplitude g.
  double rho_mean = 1.0;
  double rho_amplitude = 0.3;
  double u_amplitude = 0.2;
  int max_mode = 2;

  std::vector<double> delta_list{0.04, 0.02, 0.01};
  std::uint64_t mode_seed = 0;  ///< 0: derived from seed
  int strong_refine = 1;

  std::vector<double> epsilon_list{0.1, 0.05, 0.025, 0.0125};

  std::size_t ensemble_size = 200;
  std::size_t holdout_size = 100;
  double ensemble_delta = 0.25;
  double ensemble_Mbar = 4.0;
  std::size_t audit_fields = 50;
  bool zero_ensemble = false;

  std::vector<double> converge_cells{32, 64, 128};
  int reference_factor = 8;

  std::string certificate_path;
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  /// Kind-specific defaults, then every key of the file; unknown keys are rejected.
  static ExperimentSpec from_config(const ConfigFile& cfg, ExperimentKind kind);
  static ExperimentSpec defaults(ExperimentKind kind);

  void validate() const;
  PeriodicGrid grid() const { return PeriodicGrid(dim, cells, length); }
  std::uint64_t perturbation_seed() const noexcept { return mode_seed != 0 ? mode_seed : seed + 1000; }
  /// The resolved configuration as a JSON object.
  std::string resolved_json() const;
};

struct Bundle {
  std::vector<std::pair<std::string, std::string>> files;
  bool all_pass = true;
  std::vector<std::string> warnings;
};

/// Writes every file of the bundle atomically below `dir` (created if needed).
void write_bundle(const std::filesystem::path& dir, const Bundle& bundle);

/// Smooth data on `grid` from `seed`; momentum is rho * u.
State smooth_initial_state(const PeriodicGrid& grid, const ExperimentSpec& spec, std::uint64_t seed);
/// rho = rho_bar (1 + delta eta), u = u_bar + delta w with seeded smooth eta, w (max |.| = 1).
State perturbed_state(const State& base, const PeriodicGrid& grid, double delta, int max_mode, std::uint64_t seed);

/// Loads the certificate from spec.certificate_path or `<output_dir>/certificate.json`;
/// throws ConfigError telling the user to run `rflab certify` when absent.
KappaCertificate load_certificate(const ExperimentSpec& spec);
/// kappa used by a run: explicit, or kappa_fraction * kappa_max.  Throws
/// ParameterError when the certificate does not match or kappa >= kappa_max.
double certified_kappa(const ExperimentSpec& spec, const KappaCertificate& cert);

// ---------------------------------------------------------------- certify
KappaCertificate run_certify(const ExperimentSpec& spec);
Bundle certify_bundle(const ExperimentSpec& spec, const KappaCertificate& cert);

// ---------------------------------------------------------------- wsu
struct WsuResult {
  double kappa = 0.0;
  RelativeEnergyReport zero_report;  ///< delta = 0
  std::vector<double> delta_list;
  std::vector<RelativeEnergyReport> reports;
  std::vector<double> sup_psi;
  std::vector<double> fitted_C;
  std::vector<double> scaling_ratio;  ///< sup Psi(delta_i) / sup Psi(delta_{i+1})
};

WsuResult run_wsu(const ExperimentSpec& spec, const KappaCertificate& cert);
Bundle wsu_bundle(const ExperimentSpec& spec, const KappaCertificate& cert, const WsuResult& result);

// ---------------------------------------------------------------- relaxation sweep
struct SweepResult {
  double kappa = 0.0;
  GflowRun reference;
  std::vector<StrongProxy> proxy;
  std::vector<RelativeEnergyReport> reports;
  std::vector<double> j4_sup;  ///< max_t |J4(t)| per epsilon
  RelaxationFit fit;
};

SweepResult run_relaxation_sweep(const ExperimentSpec& spec, const KappaCertificate& cert);
Bundle sweep_bundle(const ExperimentSpec& spec, const KappaCertificate& cert, const SweepResult& result);

// ---------------------------------------------------------------- audits
struct AuditResult {
  bool all_pass = true;
  std::vector<std::string> warnings;
  std::vector<std::string> failures;
  std::string json;
};

AuditResult run_audits(const ExperimentSpec& spec);
Bundle audit_bundle(const ExperimentSpec& spec, const AuditResult& result);

// ---------------------------------------------------------------- convergence
struct ConvergenceSeries {
  std::vector<int> cells;
  std::vector<double> l1_error;
  double observed_order = 0.0;
};

struct ConvergenceResult {
  ConvergenceSeries euler;
  ConvergenceSeries gflow;
};

/// L1 errors of the density against a run refined reference_factor times
/// beyond the finest level (kappa = 0, friction-free Euler and the gamma-law gradient flow).
ConvergenceResult run_convergence(const ExperimentSpec& spec);
Bundle convergence_bundle(const ExperimentSpec& spec, const ConvergenceResult& result);

}  // namespace rflab
