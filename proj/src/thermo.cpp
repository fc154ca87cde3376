#include "rflab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "rflab/error.hpp"

namespace rflab {

namespace {

// (1+x)^gamma - 1 - gamma x, accurate near x = 0 where the direct form cancels.
// Callers pass x = (rho - rho_bar)/rho_bar; forming rho/rho_bar - 1 instead
// loses the low bits of x when rho is close to rho_bar.
double power_gap(double x, double gamma) {
  if (std::abs(x) >= 0.5) return std::expm1(gamma * std::log1p(x)) - gamma * x;
  // Binomial series sum_{n>=2} C(gamma, n) x^n.
  double coeff = gamma;  // C(gamma, 1)
  double xn = x;
  double sum = 0.0;
  for (int n = 2; n < 200; ++n) {
    coeff *= (gamma - n + 1) / n;
    xn *= x;
    const double term = coeff * xn;
    sum += term;
    if (std::abs(term) <= 1e-19 * std::abs(sum)) break;
  }
  return sum;
}

void require_positive_reference(double rho_bar) {
  if (!(rho_bar > 0.0)) throw ParameterError("reference density rho_bar must be positive");
}

}  // namespace

double h_energy(double rho, double gamma) { return std::pow(rho, gamma) / (gamma - 1.0); }

double h_prime(double rho, double gamma) { return gamma / (gamma - 1.0) * std::pow(rho, gamma - 1.0); }

double pressure(double rho, double gamma) { return std::pow(rho, gamma); }

double h_relative(double rho, double rho_bar, double gamma) {
  require_positive_reference(rho_bar);
  return std::pow(rho_bar, gamma) * power_gap((rho - rho_bar) / rho_bar, gamma) / (gamma - 1.0);
}

double p_relative(double rho, double rho_bar, double gamma) {
  require_positive_reference(rho_bar);
  return std::pow(rho_bar, gamma) * power_gap((rho - rho_bar) / rho_bar, gamma);
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

std::vector<double> logspace(double a, double b, int n) {
  auto e = linspace(std::log(a), std::log(b), n);
  for (double& x : e) x = std::exp(x);
  return e;
}

struct BoundMinima {
  double quadratic = std::numeric_limits<double>::infinity();
  double power = std::numeric_limits<double>::infinity();
};

BoundMinima bound_minima(double gamma, double delta, double Mbar, double R, int resolution) {
  BoundMinima m;
  const auto bars = linspace(delta, Mbar, delta == Mbar ? 1 : resolution);
  const auto inner = linspace(0.0, R, 4 * resolution + 1);
  const auto outer = logspace(R * (1.0 + 1.0 / resolution), 100.0 * R, 4 * resolution);
  for (double rb : bars) {
    for (double r : inner) {
      const double gap = std::abs(r - rb);
      if (gap < 1e-9 * rb) continue;
      m.quadratic = std::min(m.quadratic, h_relative(r, rb, gamma) / (gap * gap));
    }
    for (double r : outer) {
      m.power = std::min(m.power, h_relative(r, rb, gamma) / std::pow(r - rb, gamma));
    }
  }
  return m;
}

}  // namespace

RelativeBoundConstants fit_bound_constants(double gamma, double delta, double Mbar, int resolution) {
  if (!(gamma > 1.0)) throw ParameterError("gamma must exceed 1");
  if (!(delta > 0.0) || !std::isfinite(Mbar)) throw ParameterError("need 0 < delta and finite Mbar");
  if (delta > Mbar) throw ParameterError("degenerate range: delta > Mbar");
  if (resolution < 2) throw ParameterError("resolution must be at least 2");
  RelativeBoundConstants c;
  c.delta = delta;
  c.Mbar = Mbar;
  c.R = Mbar + 1.0;
  const auto m = bound_minima(gamma, delta, Mbar, c.R, resolution);
  c.C1 = 0.95 * m.quadratic;
  c.C2 = 0.95 * m.power;
  return c;
}

double audit_bound_constants(const RelativeBoundConstants& c, double gamma, int resolution) {
  const auto m = bound_minima(gamma, c.delta, c.Mbar, c.R, resolution);
  return std::min(m.quadratic / c.C1, m.power / c.C2);
}

bool KappaCertificate::matches(const PeriodicGrid& grid, const ModelParams& p) const noexcept {
  return dim == grid.dim() && cells_per_axis == grid.cells_per_axis() && length == grid.length() &&
         params.alpha == p.alpha && params.sign == p.sign && params.gamma == p.gamma;
}

std::string KappaCertificate::to_json() const {
  nlohmann::ordered_json j;
  j["c_star_emp"] = c_star_emp;
  j["kappa_max"] = kappa_max;
  j["lambda"] = lambda(params.kappa);
  j["ensemble_seed"] = ensemble_seed;
  j["ensemble_size"] = ensemble_size;
  j["grid"] = {{"dim", dim}, {"cells_per_axis", cells_per_axis}, {"length", length}};
  j["params"] = {{"gamma", params.gamma}, {"kappa", params.kappa}, {"alpha", params.alpha}, {"sign", params.sign}};
  return j.dump(2) + "\n";
}

KappaCertificate KappaCertificate::from_json(const std::string& text) {
  KappaCertificate c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.c_star_emp = j.at("c_star_emp").get<double>();
    c.kappa_max = j.at("kappa_max").get<double>();
    c.ensemble_seed = j.at("ensemble_seed").get<std::uint64_t>();
    c.ensemble_size = j.value("ensemble_size", std::size_t{0});
    c.dim = j.at("grid").at("dim").get<int>();
    c.cells_per_axis = j.at("grid").at("cells_per_axis").get<int>();
    c.length = j.at("grid").at("length").get<double>();
    c.params.gamma = j.at("params").at("gamma").get<double>();
    c.params.kappa = j.at("params").at("kappa").get<double>();
    c.params.alpha = j.at("params").at("alpha").get<double>();
    c.params.sign = j.at("params").at("sign").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed certificate: ") + e.what());
  }
  if (!(c.c_star_emp > 0.0) || !(c.kappa_max > 0.0)) throw ConfigError("certificate constants must be positive");
  return c;
}

double relative_potential_energy(std::span<const double> rho, std::span<const double> rho_bar,
                                 const ModelParams& params, const KernelTable& kernel) {
  const PeriodicGrid& grid = kernel.grid();
  require_cells(grid, rho.size(), "relative_potential_energy");
  require_cells(grid, rho_bar.size(), "relative_potential_energy");
  ScalarField diff(rho.size());
  double internal = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    diff[i] = rho[i] - rho_bar[i];
    internal += h_relative(rho[i], rho_bar[i], params.gamma);
  }
  internal *= grid.cell_volume();
  const ScalarField conv = convolve(kernel, diff, ConvBackend::Spectral);
  return internal + 0.5 * params.kappa * inner(diff, conv, grid);
}

double interaction_ratio(const DensityPair& pair, const ModelParams& params, const KernelTable& kernel) {
  const PeriodicGrid& grid = kernel.grid();
  require_cells(grid, pair.rho.size(), "interaction_ratio");
  require_cells(grid, pair.rho_bar.size(), "interaction_ratio");
  ScalarField diff(pair.rho.size());
  double internal = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    if (pair.rho[i] < 0.0) throw ParameterError("ensemble density must be non-negative");
    diff[i] = pair.rho[i] - pair.rho_bar[i];
    internal += h_relative(pair.rho[i], pair.rho_bar[i], params.gamma);
  }
  internal *= grid.cell_volume();
  const double quad = std::abs(inner(diff, convolve(kernel, diff, ConvBackend::Spectral), grid));
  if (internal == 0.0) {
    if (quad == 0.0) return std::numeric_limits<double>::quiet_NaN();
    throw Error("interaction form is nonzero where h(rho|rho_bar) vanishes: convolution inconsistent");
  }
  return quad / internal;
}

KappaCertificate estimate_c_star(std::span<const DensityPair> ensemble, const ModelParams& params,
                                 const KernelTable& kernel) {
  if (ensemble.empty()) throw ParameterError("empty ensemble");
  double worst = 0.0;
  std::size_t used = 0;
  for (const auto& pair : ensemble) {
    const double r = interaction_ratio(pair, params, kernel);
    if (std::isnan(r)) continue;
    worst = std::max(worst, r);
    ++used;
  }
  if (used == 0 || worst == 0.0) throw ParameterError("trivial ensemble");
  KappaCertificate c;
  c.c_star_emp = worst;
  c.kappa_max = 2.0 / worst;
  c.ensemble_size = ensemble.size();
  c.dim = kernel.grid().dim();
  c.cells_per_axis = kernel.grid().cells_per_axis();
  c.length = kernel.grid().length();
  c.params = params;
  return c;
}

}  // namespace rflab
