#pragma once

// Aggregation-diffusion gradient flow d_t rho = div(grad rho^gamma + kappa rho gradW*rho)
// and the companion fields of its strong solution:
//   u_bar = -grad h'(rho_bar) - kappa gradW*rho_bar
//   e_bar = d_t(rho_bar u_bar) + div(rho_bar u_bar (x) u_bar)

#include <iosfwd>
#include <limits>
#include <vector>

#include "rflab/euler.hpp"
#include "rflab/fields.hpp"
#include "rflab/riesz.hpp"

namespace rflab {

struct GflowConfig {
  ModelParams params;
  double cfl = 0.4;
  double t_end = 1.0;
  int snapshot_stride = 0;
  double snapshot_interval = 0.0;
  /// Lower density bound of the strong regime; 0 takes the initial minimum.
  double delta = 0.0;
  ConvBackend force_backend = ConvBackend::Spectral;

  void validate(int dim) const;
};

/// cfl * min(h^2 / (2 d gamma max rho^(gamma-1)), h / max |kappa gradW*rho|).
double gflow_stable_dt(std::span<const double> rho, const GflowConfig& cfg, const KernelTable& kernel);

/// One explicit step; throws SolverAbort("left strong regime") if any density drops below delta/2.
ScalarField gflow_step(std::span<const double> rho, const GflowConfig& cfg, const KernelTable& kernel, double delta,
                       double dt_cap = std::numeric_limits<double>::infinity(), double* dt_used = nullptr);

struct GflowRun {
  std::vector<double> times;
  std::vector<ScalarField> snapshots;
  std::size_t steps = 0;
};

GflowRun run_gflow(const ScalarField& rho0, const GflowConfig& cfg, const KernelTable& kernel);

struct StrongProxy {
  double time = 0.0;
  ScalarField rho_bar;
  VectorField u_bar;
  VectorField e_bar;  ///< empty for proxies that carry no error field
};

/// u_bar = -grad h'(rho_bar) - kappa gradW*rho_bar with centred differences.
VectorField gf_velocity(std::span<const double> rho_bar, const ModelParams& params, const KernelTable& kernel,
                        ConvBackend backend = ConvBackend::Spectral);

/// Needs at least three snapshots; time derivatives are second-order
/// (centred inside, one-sided at the ends).
std::vector<StrongProxy> reconstruct_strong_proxy(const GflowRun& run, const ModelParams& params,
                                                  const KernelTable& kernel);

/// Free energy per snapshot; dissipation_integral is the trapezoid integral of int rho_bar |u_bar|^2.
EnergyLedger gf_energy_ledger(const GflowRun& run, const ModelParams& params, const KernelTable& kernel);

/// CSV: t,cell,x[,y],rho_bar,u_bar_x[,u_bar_y],e_bar_x[,e_bar_y]
void write_proxy_csv(std::ostream& out, const std::vector<StrongProxy>& series, const PeriodicGrid& grid);

}  // namespace rflab
