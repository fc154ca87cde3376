#pragma once

// Finite-volume solver for the Euler-Riesz system with linear friction,
//   d_t rho + div m = 0
//   d_t m + div(m (x) m / rho) + grad rho^gamma + kappa rho gradW*rho = -nu m,
// and for its diffusively scaled form (momentum equation multiplied by
// epsilon, friction -m).  Rusanov fluxes, SSP-RK2 in time.

#include <iosfwd>
#include <limits>
#include <vector>

#include "rflab/fields.hpp"
#include "rflab/riesz.hpp"

namespace rflab {

enum class FrictionTreatment { Explicit, ImplicitSplit };
enum class Reconstruction { Constant, Linear };

struct EulerConfig {
  ModelParams params;
  double cfl = 0.4;
  double t_end = 1.0;
  /// Scaled (relaxation) regime: params.epsilon > 0 replaces params.nu.
  bool scaled = false;
  FrictionTreatment friction = FrictionTreatment::ImplicitSplit;
  /// Keep every n-th step as a snapshot (0: only the first and last state).
  int snapshot_stride = 0;
  /// When positive, steps are shortened to land on multiples of this interval
  /// and a snapshot is kept at each of them (overrides the stride).
  double snapshot_interval = 0.0;
  /// Upper bound on the time step; 0 means none.
  double dt_max = 0.0;
  /// Constant: first order.  Linear: MC-limited slopes, second order on smooth data.
  Reconstruction reconstruction = Reconstruction::Constant;
  ConvBackend force_backend = ConvBackend::Spectral;

  void validate(int dim) const;
  /// 1, or 1/epsilon in the scaled regime (multiplies pressure and interaction force).
  double force_scale() const noexcept { return scaled ? 1.0 / params.epsilon : 1.0; }
  /// nu, or 1/epsilon in the scaled regime.
  double friction_rate() const noexcept { return scaled ? 1.0 / params.epsilon : params.nu; }
};

struct EnergyBreakdown {
  double mass = 0.0;
  double kinetic = 0.0;  ///< int rho|u|^2/2, times epsilon when scaled
  double internal = 0.0;
  double interaction = 0.0;
  double dissipation_rate = 0.0;  ///< nu int rho|u|^2, or int rho|u|^2 when scaled

  double total() const noexcept { return kinetic + internal + interaction; }
};

EnergyBreakdown euler_energy(const State& s, const EulerConfig& cfg, const KernelTable& kernel);

class EnergyLedger {
 public:
  void append(double t, const EnergyBreakdown& e, double dissipation_integral);

  std::size_t size() const noexcept { return times.size(); }
  double total(std::size_t i) const noexcept { return kinetic[i] + internal[i] + interaction[i]; }

  /// CSV: t,mass,kinetic,internal,interaction,total,dissipation_integral
  void write_csv(std::ostream& out) const;

  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> kinetic;
  std::vector<double> internal;
  std::vector<double> interaction;
  std::vector<double> dissipation_integral;
};

/// cfl h / max(|u| + c), with c the (scaled) sound speed.
double stable_dt(const State& s, const EulerConfig& cfg, const PeriodicGrid& grid);

struct StepReport {
  double dt = 0.0;
  double clipped_mass_fraction = 0.0;
};

/// One SSP-RK2 step of size min(stable_dt, dt_cap, cfg.dt_max).  Friction in
/// the implicit-split treatment is solved after each stage, m <- m/(1 + r dt).
State euler_step(const State& s, const EulerConfig& cfg, const KernelTable& kernel,
                 double dt_cap = std::numeric_limits<double>::infinity(), StepReport* report = nullptr);

struct EulerRun {
  std::vector<State> snapshots;
  EnergyLedger ledger;
  std::size_t steps = 0;
};

EulerRun run_euler(const State& s0, const EulerConfig& cfg, const KernelTable& kernel);

}  // namespace rflab
