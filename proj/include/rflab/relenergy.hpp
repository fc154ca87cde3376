#pragma once

// Relative energy between a (weak) Euler-Riesz run and a reference ("strong")
// solution, its term decomposition and Gronwall-rate fits.
//
// Weak-strong mode:   Psi   = int 1/2 rho|u-ub|^2 + h(rho|rb) + kappa/2 (rho-rb) W*(rho-rb)
// Relaxation mode:    Phi_e = same with the kinetic part multiplied by epsilon
//
// Rates (integrated in time by the trapezoid rule):
//   I1 = -int grad ub : rho (u-ub)(x)(u-ub)       (times epsilon in relaxation mode: J1)
//   I2 = -int div ub p(rho|rb)                                                    (J2)
//   I3 =  int kappa (rho-rb) ub . gradW*(rho-rb)                                  (J3)
//   J4 = -int epsilon (rho/rb) eb . (u-ub)                       (relaxation mode only)

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rflab/euler.hpp"
#include "rflab/fields.hpp"
#include "rflab/gflow.hpp"
#include "rflab/riesz.hpp"

namespace rflab {

enum class RelativeMode { WeakStrong, Relaxation };

struct RelativeEnergyParts {
  double kinetic = 0.0;
  double internal = 0.0;
  double interaction = 0.0;

  double total() const noexcept { return kinetic + internal + interaction; }
};

/// Relaxation mode takes epsilon from params.epsilon.
RelativeEnergyParts relative_energy(const State& s, std::span<const double> rho_bar, const VectorField& u_bar,
                                    const ModelParams& params, const KernelTable& kernel, RelativeMode mode);

/// Strong proxy built from an Euler state (u_bar = m/rho, no error field).
StrongProxy proxy_from_state(const State& s, const PeriodicGrid& grid);

struct TermRates {
  std::array<double, 4> terms{};  ///< I1..I3 (J1..J4); the fourth is zero in weak-strong mode
  double friction = 0.0;          ///< nu int rho|u-ub|^2, or int rho|u-ub|^2 in relaxation mode
};

TermRates term_rates(const State& s, const StrongProxy& proxy, const ModelParams& params, const KernelTable& kernel,
                     RelativeMode mode);

/// Asymmetric form of I3 (without the time integral).
double interaction_term(std::span<const double> rho, std::span<const double> rho_bar, const VectorField& u_bar,
                        const ModelParams& params, const KernelTable& kernel);

struct RelativeEnergyReport {
  RelativeMode mode = RelativeMode::WeakStrong;
  double epsilon = 0.0;
  std::vector<double> times;
  std::vector<double> psi_or_phi;
  std::vector<double> kinetic_part;
  std::vector<double> internal_part;
  std::vector<double> interaction_part;
  std::vector<double> friction_dissipation;  ///< cumulative
  std::array<std::vector<double>, 4> terms;  ///< cumulative
  std::array<std::vector<double>, 4> rates;
  std::vector<double> friction_rate;
  double fitted_C = 0.0;
  bool bound_violated = false;

  double sup() const;
  /// CSV: t,total,kinetic,internal,interaction,dissipation,I1_or_J1,I2_or_J2,I3_or_J3[,J4]
  void write_csv(std::ostream& out) const;
};

/// Both series must share their snapshot times (relative tolerance 1e-9).
RelativeEnergyReport term_decomposition(const std::vector<State>& weak, const std::vector<StrongProxy>& strong,
                                        const ModelParams& params, const KernelTable& kernel, RelativeMode mode);

struct GronwallFit {
  double fitted_C = 0.0;
  bool bound_violated = false;
  std::string note;
};

/// fitted_C = max_{t>0} log(Psi(t)/Psi(0)) / t.  Psi(0) = 0 with a later
/// positive value is reported as "bound trivially violated".
GronwallFit gronwall_fit(std::span<const double> times, std::span<const double> psi);

/// Fills report.fitted_C and report.bound_violated (weak-strong mode).
void apply_gronwall_fit(RelativeEnergyReport& report);

struct RelaxationFit {
  std::vector<double> epsilon_list;
  std::vector<double> sup_phi_list;
  std::vector<double> phi0_list;
  double horizon = 0.0;
  double prefactor = 0.0;  ///< A = max sup Phi / (Phi(0) + eps^2)
  double fitted_C = 0.0;   ///< log(A) / horizon
  double slope = 0.0;      ///< least-squares slope of log sup Phi against log eps
  bool bound_violated = false;

  std::string to_json() const;
};

RelaxationFit relaxation_fit(std::span<const double> epsilon_list, std::span<const double> sup_phi,
                             std::span<const double> phi0, double horizon);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace rflab
