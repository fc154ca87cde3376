#include "rflab/relenergy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"

#include "rflab/error.hpp"
#include "rflab/io.hpp"
#include "rflab/thermo.hpp"

namespace rflab {

namespace {

void check_proxy(const PeriodicGrid& grid, std::span<const double> rho_bar, const VectorField& u_bar) {
  require_cells(grid, rho_bar.size(), "rho_bar");
  if (u_bar.dim() != grid.dim()) throw ParameterError("u_bar has the wrong number of components");
  require_cells(grid, u_bar.cells(), "u_bar");
  for (double r : rho_bar) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("invalid proxy: rho_bar must be positive");
  }
}

double kinetic_weight(const ModelParams& params, RelativeMode mode) {
  if (mode == RelativeMode::Relaxation) {
    if (!(params.epsilon > 0.0)) throw ParameterError("relaxation mode needs epsilon > 0");
    return params.epsilon;
  }
  return 1.0;
}

}  // namespace

RelativeEnergyParts relative_energy(const State& s, std::span<const double> rho_bar, const VectorField& u_bar,
                                    const ModelParams& params, const KernelTable& kernel, RelativeMode mode) {
  const PeriodicGrid& grid = kernel.grid();
  require_cells(grid, s.rho.size(), "rho");
  check_proxy(grid, rho_bar, u_bar);
  const double weight = kinetic_weight(params, mode);
  const VectorField u = velocity(s, vacuum_floor(s.rho, grid));
  const std::size_t n = grid.size();

  RelativeEnergyParts parts;
  ScalarField q(n);
  for (std::size_t i = 0; i < n; ++i) {
    double w2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      const double w = u[a][i] - u_bar[a][i];
      w2 += w * w;
    }
    parts.kinetic += 0.5 * s.rho[i] * w2;
    parts.internal += h_relative(s.rho[i], rho_bar[i], params.gamma);
    q[i] = s.rho[i] - rho_bar[i];
  }
  parts.kinetic *= weight * grid.cell_volume();
  parts.internal *= grid.cell_volume();
  if (params.kappa != 0.0) {
    parts.interaction = 0.5 * params.kappa * inner(q, convolve(kernel, q, ConvBackend::Spectral), grid);
  }
  return parts;
}

StrongProxy proxy_from_state(const State& s, const PeriodicGrid& grid) {
  validate_state(s, grid);
  StrongProxy p;
  p.time = s.time;
  p.rho_bar = s.rho;
  p.u_bar = velocity(s, vacuum_floor(s.rho, grid));
  return p;
}

double interaction_term(std::span<const double> rho, std::span<const double> rho_bar, const VectorField& u_bar,
                        const ModelParams& params, const KernelTable& kernel) {
  const PeriodicGrid& grid = kernel.grid();
  if (params.kappa == 0.0) return 0.0;
  ScalarField q(rho.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = rho[i] - rho_bar[i];
  const VectorField g = grad_convolve(kernel, q, ConvBackend::Spectral);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    double dot = 0.0;
    for (int a = 0; a < grid.dim(); ++a) dot += u_bar[a][i] * g[a][i];
    sum += q[i] * dot;
  }
  return params.kappa * sum * grid.cell_volume();
}

TermRates term_rates(const State& s, const StrongProxy& proxy, const ModelParams& params, const KernelTable& kernel,
                     RelativeMode mode) {
  const PeriodicGrid& grid = kernel.grid();
  const int d = grid.dim();
  const std::size_t n = grid.size();
  require_cells(grid, s.rho.size(), "rho");
  check_proxy(grid, proxy.rho_bar, proxy.u_bar);
  const double weight = kinetic_weight(params, mode);
  const VectorField u = velocity(s, vacuum_floor(s.rho, grid));

  // grad_u[a][b] = d_b ub_a
  std::vector<VectorField> grad_u;
  grad_u.reserve(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) grad_u.push_back(gradient(proxy.u_bar[a], grid));

  const bool with_e = mode == RelativeMode::Relaxation && proxy.e_bar.dim() == d;
  TermRates r;
  double i1 = 0.0, i2 = 0.0, j4 = 0.0, fr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 2> w{};
    double w2 = 0.0, div = 0.0;
    for (int a = 0; a < d; ++a) {
      w[a] = u[a][i] - proxy.u_bar[a][i];
      w2 += w[a] * w[a];
      div += grad_u[a][a][i];
    }
    double contraction = 0.0;
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) contraction += grad_u[a][b][i] * w[a] * w[b];
    }
    i1 -= s.rho[i] * contraction;
    i2 -= div * p_relative(s.rho[i], proxy.rho_bar[i], params.gamma);
    fr += s.rho[i] * w2;
    if (with_e) {
      double ew = 0.0;
      for (int a = 0; a < d; ++a) ew += proxy.e_bar[a][i] * w[a];
      j4 -= s.rho[i] / proxy.rho_bar[i] * ew;
    }
  }
  const double dv = grid.cell_volume();
  r.terms[0] = weight * i1 * dv;
  r.terms[1] = i2 * dv;
  r.terms[2] = interaction_term(s.rho, proxy.rho_bar, proxy.u_bar, params, kernel);
  r.terms[3] = mode == RelativeMode::Relaxation ? params.epsilon * j4 * dv : 0.0;
  r.friction = (mode == RelativeMode::Relaxation ? 1.0 : params.nu) * fr * dv;
  return r;
}

double RelativeEnergyReport::sup() const {
  double m = 0.0;
  for (double v : psi_or_phi) m = std::max(m, v);
  return m;
}

void RelativeEnergyReport::write_csv(std::ostream& out) const {
  const bool relax = mode == RelativeMode::Relaxation;
  out << "t,total,kinetic,internal,interaction,dissipation,I1_or_J1,I2_or_J2,I3_or_J3";
  if (relax) out << ",J4";
  out << '\n';
  for (std::size_t k = 0; k < times.size(); ++k) {
    out << io::format_real(times[k]) << ',' << io::format_real(psi_or_phi[k]) << ','
        << io::format_real(kinetic_part[k]) << ',' << io::format_real(internal_part[k]) << ','
        << io::format_real(interaction_part[k]) << ',' << io::format_real(friction_dissipation[k]);
    for (int j = 0; j < (relax ? 4 : 3); ++j) out << ',' << io::format_real(terms[j][k]);
    out << '\n';
  }
}

RelativeEnergyReport term_decomposition(const std::vector<State>& weak, const std::vector<StrongProxy>& strong,
                                        const ModelParams& params, const KernelTable& kernel, RelativeMode mode) {
  if (weak.size() != strong.size() || weak.empty()) throw GridMismatch("time-grid mismatch: snapshot counts differ");
  for (std::size_t k = 0; k < weak.size(); ++k) {
    const double scale = std::max(1.0, std::abs(strong[k].time));
    if (std::abs(weak[k].time - strong[k].time) > 1e-9 * scale) {
      throw GridMismatch("time-grid mismatch at snapshot " + std::to_string(k));
    }
  }
  RelativeEnergyReport rep;
  rep.mode = mode;
  rep.epsilon = mode == RelativeMode::Relaxation ? params.epsilon : 0.0;
  double friction = 0.0;
  std::array<double, 4> cumulative{};
  for (std::size_t k = 0; k < weak.size(); ++k) {
    const auto parts = relative_energy(weak[k], strong[k].rho_bar, strong[k].u_bar, params, kernel, mode);
    const auto r = term_rates(weak[k], strong[k], params, kernel, mode);
    if (k > 0) {
      const double dt = strong[k].time - strong[k - 1].time;
      friction += 0.5 * dt * (rep.friction_rate.back() + r.friction);
      for (int j = 0; j < 4; ++j) cumulative[j] += 0.5 * dt * (rep.rates[j].back() + r.terms[j]);
    }
    rep.times.push_back(strong[k].time);
    rep.psi_or_phi.push_back(parts.total());
    rep.kinetic_part.push_back(parts.kinetic);
    rep.internal_part.push_back(parts.internal);
    rep.interaction_part.push_back(parts.interaction);
    rep.friction_rate.push_back(r.friction);
    rep.friction_dissipation.push_back(friction);
    for (int j = 0; j < 4; ++j) {
      rep.rates[j].push_back(r.terms[j]);
      rep.terms[j].push_back(cumulative[j]);
    }
  }
  if (mode == RelativeMode::WeakStrong) apply_gronwall_fit(rep);
  return rep;
}

GronwallFit gronwall_fit(std::span<const double> times, std::span<const double> psi) {
  if (times.size() != psi.size() || psi.empty()) throw ParameterError("gronwall_fit: series length mismatch");
  GronwallFit fit;
  const double psi0 = psi[0];
  if (psi0 <= 0.0) {
    for (std::size_t k = 1; k < psi.size(); ++k) {
      if (psi[k] > 0.0) {
        fit.fitted_C = std::numeric_limits<double>::infinity();
        fit.bound_violated = true;
        fit.note = "bound trivially violated";
        return fit;
      }
    }
    return fit;
  }
  double c = 0.0;
  bool any = false;
  for (std::size_t k = 1; k < psi.size(); ++k) {
    const double dt = times[k] - times[0];
    if (!(dt > 0.0)) continue;
    if (!(psi[k] > 0.0)) continue;
    const double rate = std::log(psi[k] / psi0) / dt;
    c = any ? std::max(c, rate) : rate;
    any = true;
  }
  fit.fitted_C = any ? c : 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    const double envelope = psi0 * std::exp(fit.fitted_C * (times[k] - times[0]));
    if (psi[k] > envelope * (1.0 + 1e-12)) fit.bound_violated = true;
  }
  return fit;
}

void apply_gronwall_fit(RelativeEnergyReport& report) {
  const auto fit = gronwall_fit(report.times, report.psi_or_phi);
  report.fitted_C = fit.fitted_C;
  report.bound_violated = fit.bound_violated;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("loglog_slope needs at least two points");
  double sx = 0.0, sy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ParameterError("loglog_slope needs positive data");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    num += dx * (std::log(y[i]) - my);
    den += dx * dx;
  }
  if (den == 0.0) throw ParameterError("loglog_slope needs distinct abscissae");
  return num / den;
}

RelaxationFit relaxation_fit(std::span<const double> epsilon_list, std::span<const double> sup_phi,
                             std::span<const double> phi0, double horizon) {
  if (epsilon_list.size() != sup_phi.size() || sup_phi.size() != phi0.size() || sup_phi.empty()) {
    throw ParameterError("relaxation_fit: list lengths differ");
  }
  if (!(horizon > 0.0)) throw ParameterError("relaxation_fit: horizon must be positive");
  RelaxationFit fit;
  fit.epsilon_list.assign(epsilon_list.begin(), epsilon_list.end());
  fit.sup_phi_list.assign(sup_phi.begin(), sup_phi.end());
  fit.phi0_list.assign(phi0.begin(), phi0.end());
  fit.horizon = horizon;
  for (std::size_t i = 0; i < sup_phi.size(); ++i) {
    const double e = epsilon_list[i];
    if (!std::isfinite(sup_phi[i])) fit.bound_violated = true;
    fit.prefactor = std::max(fit.prefactor, sup_phi[i] / (phi0[i] + e * e));
  }
  fit.fitted_C = fit.prefactor > 0.0 ? std::log(fit.prefactor) / horizon : 0.0;
  fit.slope = sup_phi.size() >= 2 ? loglog_slope(epsilon_list, sup_phi) : 0.0;
  return fit;
}

std::string RelaxationFit::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = "relaxation";
  j["fitted_C"] = fitted_C;
  j["prefactor"] = prefactor;
  j["horizon"] = horizon;
  j["slope"] = slope;
  j["epsilon_list"] = epsilon_list;
  j["sup_phi_list"] = sup_phi_list;
  j["phi0_list"] = phi0_list;
  j["bound_violated"] = bound_violated;
  return j.dump(2);
}

}  // namespace rflab
