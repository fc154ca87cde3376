#include "rflab/gflow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "rflab/error.hpp"
#include "rflab/io.hpp"
#include "rflab/thermo.hpp"

namespace rflab {

void GflowConfig::validate(int dim) const {
  params.validate(dim);
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ParameterError("cfl must lie in (0, 1]");
  if (!(t_end >= 0.0)) throw ParameterError("t_end must be non-negative");
  if (snapshot_stride < 0 || !(snapshot_interval >= 0.0)) throw ParameterError("invalid snapshot schedule");
  if (!(delta >= 0.0)) throw ParameterError("delta must be non-negative");
}

double gflow_stable_dt(std::span<const double> rho, const GflowConfig& cfg, const KernelTable& kernel) {
  const PeriodicGrid& grid = kernel.grid();
  const double h = grid.cell_size();
  const double gamma = cfg.params.gamma;
  double rmax = 0.0;
  for (double r : rho) rmax = std::max(rmax, r);
  const double diffusivity = gamma * std::pow(rmax, gamma - 1.0);
  double dt = h * h / (2.0 * grid.dim() * diffusivity + 1e-300);
  if (cfg.params.kappa != 0.0) {
    const VectorField g = grad_convolve(kernel, rho, cfg.force_backend);
    double gmax = 0.0;
    for (const auto& c : g.comp) {
      for (double v : c) gmax = std::max(gmax, std::abs(cfg.params.kappa * v));
    }
    if (gmax > 0.0) dt = std::min(dt, h / gmax);
  }
  return cfg.cfl * dt;
}

ScalarField gflow_step(std::span<const double> rho, const GflowConfig& cfg, const KernelTable& kernel, double delta,
                       double dt_cap, double* dt_used) {
  const PeriodicGrid& grid = kernel.grid();
  require_cells(grid, rho.size(), "gflow_step");
  const double dt = std::min(gflow_stable_dt(rho, cfg, kernel), dt_cap);
  if (!(dt > 0.0)) throw SolverAbort("time step underflow");
  const double gamma = cfg.params.gamma;
  const double kappa = cfg.params.kappa;
  const double inv_h = 1.0 / grid.cell_size();
  const std::size_t n = grid.size();

  ScalarField p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = pressure(rho[i], gamma);
  VectorField g;
  if (kappa != 0.0) g = grad_convolve(kernel, rho, cfg.force_backend);

  ScalarField out(rho.begin(), rho.end());
  ScalarField flux(n);
  for (int a = 0; a < grid.dim(); ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = grid.neighbor(i, a, 1);
      double f = -(p[j] - p[i]) * inv_h;
      if (kappa != 0.0) f -= kappa * 0.5 * (rho[i] + rho[j]) * 0.5 * (g[a][i] + g[a][j]);
      flux[i] = f;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] -= dt * (flux[i] - flux[grid.neighbor(i, a, -1)]) * inv_h;
  }
  for (double v : out) {
    if (!std::isfinite(v)) throw SolverAbort("non-finite state");
    if (v < 0.5 * delta) throw SolverAbort("left strong regime");
  }
  if (dt_used) *dt_used = dt;
  return out;
}

GflowRun run_gflow(const ScalarField& rho0, const GflowConfig& cfg, const KernelTable& kernel) {
  const PeriodicGrid& grid = kernel.grid();
  cfg.validate(grid.dim());
  require_cells(grid, rho0.size(), "run_gflow");
  double delta = cfg.delta;
  if (delta == 0.0) delta = *std::min_element(rho0.begin(), rho0.end());
  if (!(delta > 0.0)) throw ParameterError("gradient-flow data must be bounded away from vacuum");
  for (double v : rho0) {
    if (v < delta) throw ParameterError("initial density below delta");
  }

  GflowRun run;
  run.times.push_back(0.0);
  run.snapshots.push_back(rho0);
  ScalarField rho = rho0;
  double t = 0.0;
  const double tol = 1e-12 * std::max(1.0, cfg.t_end);
  std::size_t next_out = 1;
  while (cfg.t_end - t > tol) {
    double cap = cfg.t_end - t;
    if (cfg.snapshot_interval > 0.0) cap = std::min(cap, next_out * cfg.snapshot_interval - t);
    double dt = 0.0;
    rho = gflow_step(rho, cfg, kernel, delta, cap, &dt);
    t += dt;
    ++run.steps;
    const bool last = cfg.t_end - t <= tol;
    bool keep = false;
    if (cfg.snapshot_interval > 0.0) {
      if (std::abs(t - next_out * cfg.snapshot_interval) <= tol) {
        ++next_out;
        keep = true;
      }
    } else if (cfg.snapshot_stride > 0 && run.steps % static_cast<std::size_t>(cfg.snapshot_stride) == 0) {
      keep = true;
    }
    if (last) {
      t = cfg.t_end;
      keep = true;
    }
    if (keep && run.times.back() != t) {
      run.times.push_back(t);
      run.snapshots.push_back(rho);
    }
  }
  return run;
}

VectorField gf_velocity(std::span<const double> rho_bar, const ModelParams& params, const KernelTable& kernel,
                        ConvBackend backend) {
  const PeriodicGrid& grid = kernel.grid();
  require_cells(grid, rho_bar.size(), "gf_velocity");
  ScalarField hp(rho_bar.size());
  for (std::size_t i = 0; i < hp.size(); ++i) hp[i] = h_prime(rho_bar[i], params.gamma);
  VectorField u = gradient(hp, grid);
  for (auto& c : u.comp) {
    for (double& v : c) v = -v;
  }
  if (params.kappa != 0.0) {
    const VectorField g = grad_convolve(kernel, rho_bar, backend);
    for (int a = 0; a < grid.dim(); ++a) {
      for (std::size_t i = 0; i < hp.size(); ++i) u[a][i] -= params.kappa * g[a][i];
    }
  }
  return u;
}

namespace {

// Weights of the three-point derivative at times[k] using the stencil starting at s.
std::array<double, 3> derivative_weights(const std::vector<double>& t, std::size_t s, std::size_t k) {
  const double t0 = t[s], t1 = t[s + 1], t2 = t[s + 2], x = t[k];
  // Derivatives of the Lagrange basis polynomials at x.
  return {((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2)), ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2)),
          ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1))};
}

}  // namespace

std::vector<StrongProxy> reconstruct_strong_proxy(const GflowRun& run, const ModelParams& params,
                                                  const KernelTable& kernel) {
  const std::size_t m = run.snapshots.size();
  if (m < 3 || run.times.size() != m) throw ParameterError("need at least three snapshots");
  const PeriodicGrid& grid = kernel.grid();
  const int d = grid.dim();
  const std::size_t n = grid.size();

  std::vector<StrongProxy> out(m);
  std::vector<VectorField> flux(m);  // rho_bar u_bar
  for (std::size_t k = 0; k < m; ++k) {
    out[k].time = run.times[k];
    out[k].rho_bar = run.snapshots[k];
    out[k].u_bar = gf_velocity(run.snapshots[k], params, kernel);
    flux[k] = VectorField(d, n);
    for (int a = 0; a < d; ++a) {
      for (std::size_t i = 0; i < n; ++i) flux[k][a][i] = out[k].rho_bar[i] * out[k].u_bar[a][i];
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t s = k == 0 ? 0 : (k == m - 1 ? m - 3 : k - 1);
    const auto w = derivative_weights(run.times, s, k);
    VectorField e(d, n);
    for (int b = 0; b < d; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        e[b][i] = w[0] * flux[s][b][i] + w[1] * flux[s + 1][b][i] + w[2] * flux[s + 2][b][i];
      }
      // div(rho u u_b) = sum_a d_a (rho u_a u_b)
      VectorField tensor_row(d, n);
      for (int a = 0; a < d; ++a) {
        for (std::size_t i = 0; i < n; ++i) tensor_row[a][i] = flux[k][a][i] * out[k].u_bar[b][i];
      }
      const ScalarField div = divergence(tensor_row, grid);
      for (std::size_t i = 0; i < n; ++i) e[b][i] += div[i];
    }
    out[k].e_bar = std::move(e);
  }
  return out;
}

EnergyLedger gf_energy_ledger(const GflowRun& run, const ModelParams& params, const KernelTable& kernel) {
  const PeriodicGrid& grid = kernel.grid();
  EnergyLedger ledger;
  double dissipation = 0.0;
  double prev_rate = 0.0;
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const ScalarField& rho = run.snapshots[k];
    EnergyBreakdown e;
    e.mass = integral(rho, grid);
    double ie = 0.0;
    for (double r : rho) ie += h_energy(r, params.gamma);
    e.internal = ie * grid.cell_volume();
    if (params.kappa != 0.0) {
      e.interaction = 0.5 * params.kappa * inner(rho, convolve(kernel, rho, ConvBackend::Spectral), grid);
    }
    const VectorField u = gf_velocity(rho, params, kernel);
    double rate = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      for (int a = 0; a < grid.dim(); ++a) rate += rho[i] * u[a][i] * u[a][i];
    }
    rate *= grid.cell_volume();
    e.dissipation_rate = rate;
    if (k > 0) dissipation += 0.5 * (run.times[k] - run.times[k - 1]) * (prev_rate + rate);
    prev_rate = rate;
    ledger.append(run.times[k], e, dissipation);
  }
  return ledger;
}

void write_proxy_csv(std::ostream& out, const std::vector<StrongProxy>& series, const PeriodicGrid& grid) {
  const bool two = grid.dim() == 2;
  out << (two ? "t,cell,x,y,rho_bar,u_bar_x,u_bar_y,e_bar_x,e_bar_y\n" : "t,cell,x,rho_bar,u_bar_x,e_bar_x\n");
  for (const auto& p : series) {
    const bool has_e = p.e_bar.dim() == grid.dim();
    for (std::size_t c = 0; c < grid.size(); ++c) {
      auto [ix, iy] = grid.coords(c);
      out << io::format_real(p.time) << ',' << c << ',' << io::format_real(grid.center(ix));
      if (two) out << ',' << io::format_real(grid.center(iy));
      out << ',' << io::format_real(p.rho_bar[c]);
      for (int a = 0; a < grid.dim(); ++a) out << ',' << io::format_real(p.u_bar[a][c]);
      for (int a = 0; a < grid.dim(); ++a) out << ',' << io::format_real(has_e ? p.e_bar[a][c] : 0.0);
      out << '\n';
    }
  }
}

}  // namespace rflab
