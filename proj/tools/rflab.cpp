// rflab <wsu|sweep|audit|certify|converge> --config <file> [--out <dir>] [--seed <n>]
//
// Exit codes: 0 pass, 2 audit failure, 3 solver abort, 4 config error.

#include <cstdint>
#include <iostream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "rflab/config.hpp"
#include "rflab/error.hpp"
#include "rflab/experiments.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kAuditFailure = 2;
constexpr int kSolverAbort = 3;
constexpr int kConfigError = 4;

int execute(const std::string& command, const std::string& config_path, const std::string& out_dir,
            const std::uint64_t* seed) {
  using namespace rflab;
  const ExperimentKind kind = parse_kind(command);
  ConfigFile cfg = ConfigFile::load(config_path);
  if (!out_dir.empty()) cfg.set("output_dir", out_dir);
  if (seed) cfg.set("seed", std::to_string(*seed));
  const ExperimentSpec spec = ExperimentSpec::from_config(cfg, kind);

  Bundle bundle;
  switch (kind) {
    case ExperimentKind::Certify: {
      const auto cert = run_certify(spec);
      bundle = certify_bundle(spec, cert);
      std::cout << "c_star_emp = " << cert.c_star_emp << "\nkappa_max = " << cert.kappa_max << '\n';
      break;
    }
    case ExperimentKind::Wsu: {
      const auto cert = load_certificate(spec);
      const auto result = run_wsu(spec, cert);
      bundle = wsu_bundle(spec, cert, result);
      std::cout << "delta = 0: sup Psi = " << result.zero_report.sup() << '\n';
      for (std::size_t i = 0; i < result.delta_list.size(); ++i) {
        std::cout << "delta = " << result.delta_list[i] << ": sup Psi = " << result.sup_psi[i]
                  << ", fitted C = " << result.fitted_C[i] << '\n';
      }
      break;
    }
    case ExperimentKind::RelaxationSweep: {
      const auto cert = load_certificate(spec);
      const auto result = run_relaxation_sweep(spec, cert);
      bundle = sweep_bundle(spec, cert, result);
      for (std::size_t i = 0; i < result.fit.epsilon_list.size(); ++i) {
        std::cout << "epsilon = " << result.fit.epsilon_list[i] << ": sup Phi = " << result.fit.sup_phi_list[i]
                  << '\n';
      }
      std::cout << "slope = " << result.fit.slope << '\n';
      break;
    }
    case ExperimentKind::Audit: {
      const auto result = run_audits(spec);
      bundle = audit_bundle(spec, result);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& f : result.failures) std::cerr << "audit failed: " << f << '\n';
      std::cout << "all_pass = " << (result.all_pass ? "true" : "false") << '\n';
      break;
    }
    case ExperimentKind::Convergence: {
      const auto result = run_convergence(spec);
      bundle = convergence_bundle(spec, result);
      std::cout << "euler order = " << result.euler.observed_order << "\ngflow order = " << result.gflow.observed_order
                << '\n';
      break;
    }
  }
  write_bundle(spec.output_dir, bundle);
  return bundle.all_pass ? kPass : kAuditFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Riesz relative-energy laboratory"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"wsu", "weak-strong stability study against a smooth reference"},
      {"sweep", "high-friction sweep against the gradient-flow limit"},
      {"audit", "HLS chain, gradient bound and relative-energy constant audits"},
      {"certify", "estimate C* and write certificate.json"},
      {"converge", "self-convergence of both solvers against a refined reference"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "flat key = value config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  const auto* sub = app.get_subcommands().front();
  const bool seed_given = sub->count("--seed") > 0;
  try {
    return execute(sub->get_name(), config_path, out_dir, seed_given ? &seed : nullptr);
  } catch (const rflab::SolverAbort& e) {
    std::cerr << "solver abort: " << e.what() << '\n';
    return kSolverAbort;
  } catch (const rflab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}
