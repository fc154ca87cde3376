#pragma once

// Gamma-law thermodynamics: internal energy h(rho) = rho^gamma/(gamma-1),
// pressure p(rho) = rho^gamma, their Bregman gaps, the lower-bound constants
// for h(rho|rho_bar), and the empirical C* / kappa-threshold certificate.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rflab/fields.hpp"
#include "rflab/riesz.hpp"

namespace rflab {

double h_energy(double rho, double gamma);
double h_prime(double rho, double gamma);
double pressure(double rho, double gamma);

/// h(rho) - h(rho_bar) - h'(rho_bar)(rho - rho_bar); throws if rho_bar <= 0.
double h_relative(double rho, double rho_bar, double gamma);
/// p(rho) - p(rho_bar) - p'(rho_bar)(rho - rho_bar); equals (gamma-1) h_relative.
double p_relative(double rho, double rho_bar, double gamma);

struct RelativeBoundConstants {
  double R = 0.0;   ///< crossover between the quadratic and gamma-power regimes
  double C1 = 0.0;  ///< h(rho|rho_bar) >= C1 |rho - rho_bar|^2 on [0, R]
  double C2 = 0.0;  ///< h(rho|rho_bar) >= C2 |rho - rho_bar|^gamma on (R, inf)
  double delta = 0.0;
  double Mbar = 0.0;
};

/// Grid minimisation over rho_bar in [delta, Mbar] with a 5% safety margin.
RelativeBoundConstants fit_bound_constants(double gamma, double delta, double Mbar, int resolution = 200);

/// Smallest value of h(rho|rho_bar) / bound over a grid of the given
/// resolution (>= 1 means the constants hold there).
double audit_bound_constants(const RelativeBoundConstants& c, double gamma, int resolution);

struct DensityPair {
  ScalarField rho;
  ScalarField rho_bar;
};

struct KappaCertificate {
  double c_star_emp = 0.0;
  double kappa_max = 0.0;
  std::uint64_t ensemble_seed = 0;
  std::size_t ensemble_size = 0;
  int dim = 0;
  int cells_per_axis = 0;
  double length = 0.0;
  ModelParams params;

  /// 1 - kappa C* / 2, positive exactly when kappa < kappa_max.
  double lambda(double kappa) const noexcept { return 1.0 - 0.5 * kappa * c_star_emp; }
  bool matches(const PeriodicGrid& grid, const ModelParams& p) const noexcept;

  std::string to_json() const;
  static KappaCertificate from_json(const std::string& text);
};

/// |int (rho - rho_bar) W*(rho - rho_bar)| / int h(rho|rho_bar) for one pair.
double interaction_ratio(const DensityPair& pair, const ModelParams& params, const KernelTable& kernel);

/// Relative potential energy int h(rho|rho_bar) + kappa/2 (rho-rho_bar) W*(rho-rho_bar).
double relative_potential_energy(std::span<const double> rho, std::span<const double> rho_bar,
                                 const ModelParams& params, const KernelTable& kernel);

/// Maximum interaction_ratio over the ensemble; pairs with rho == rho_bar are skipped.
KappaCertificate estimate_c_star(std::span<const DensityPair> ensemble, const ModelParams& params,
                                 const KernelTable& kernel);

}  // namespace rflab
