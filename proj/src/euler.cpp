#include "rflab/euler.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rflab/error.hpp"
#include "rflab/io.hpp"
#include "rflab/thermo.hpp"

namespace rflab {

void EulerConfig::validate(int dim) const {
  params.validate(dim);
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ParameterError("cfl must lie in (0, 1]");
  if (!(t_end >= 0.0)) throw ParameterError("t_end must be non-negative");
  if (scaled && !(params.epsilon > 0.0)) throw ParameterError("scaled regime needs epsilon > 0");
  if (snapshot_stride < 0) throw ParameterError("snapshot_stride must be non-negative");
  if (!(snapshot_interval >= 0.0)) throw ParameterError("snapshot_interval must be non-negative");
  if (!(dt_max >= 0.0)) throw ParameterError("dt_max must be non-negative");
}

EnergyBreakdown euler_energy(const State& s, const EulerConfig& cfg, const KernelTable& kernel) {
  const PeriodicGrid& grid = kernel.grid();
  const double floor = vacuum_floor(s.rho, grid);
  const double gamma = cfg.params.gamma;
  const int d = grid.dim();
  double ke = 0.0, ie = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    ie += h_energy(s.rho[i], gamma);
    if (s.rho[i] > floor) {
      double m2 = 0.0;
      for (int a = 0; a < d; ++a) m2 += s.mom[a][i] * s.mom[a][i];
      ke += m2 / s.rho[i];
    }
  }
  EnergyBreakdown e;
  const double w = grid.cell_volume();
  e.mass = integral(s.rho, grid);
  const double rho_u2 = ke * w;
  e.kinetic = 0.5 * rho_u2 * (cfg.scaled ? cfg.params.epsilon : 1.0);
  e.internal = ie * w;
  if (cfg.params.kappa != 0.0) {
    e.interaction = 0.5 * cfg.params.kappa * inner(s.rho, convolve(kernel, s.rho, ConvBackend::Spectral), grid);
  }
  e.dissipation_rate = (cfg.scaled ? 1.0 : cfg.params.nu) * rho_u2;
  return e;
}

void EnergyLedger::append(double t, const EnergyBreakdown& e, double dissipation) {
  times.push_back(t);
  mass.push_back(e.mass);
  kinetic.push_back(e.kinetic);
  internal.push_back(e.internal);
  interaction.push_back(e.interaction);
  dissipation_integral.push_back(dissipation);
}

void EnergyLedger::write_csv(std::ostream& out) const {
  out << "t,mass,kinetic,internal,interaction,total,dissipation_integral\n";
  for (std::size_t i = 0; i < size(); ++i) {
    out << io::format_real(times[i]) << ',' << io::format_real(mass[i]) << ',' << io::format_real(kinetic[i]) << ','
        << io::format_real(internal[i]) << ',' << io::format_real(interaction[i]) << ','
        << io::format_real(total(i)) << ',' << io::format_real(dissipation_integral[i]) << '\n';
  }
}

double stable_dt(const State& s, const EulerConfig& cfg, const PeriodicGrid& grid) {
  const double floor = vacuum_floor(s.rho, grid);
  const double gamma = cfg.params.gamma;
  const double scale = cfg.force_scale();
  double speed = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    const double r = s.rho[i];
    double u2 = 0.0;
    if (r > floor) {
      for (int a = 0; a < grid.dim(); ++a) u2 += (s.mom[a][i] / r) * (s.mom[a][i] / r);
    }
    const double c = std::sqrt(scale * gamma * std::pow(std::max(r, 0.0), gamma - 1.0));
    speed = std::max(speed, std::sqrt(u2) + c);
  }
  double dt = cfg.cfl * grid.cell_size() / (speed + 1e-300);
  if (cfg.friction == FrictionTreatment::Explicit && cfg.friction_rate() > 0.0) {
    dt = std::min(dt, cfg.cfl / cfg.friction_rate());
  }
  return dt;
}

namespace {

double mc_slope(double left, double centre, double right) {
  const double a = centre - left;
  const double b = right - centre;
  if (a * b <= 0.0) return 0.0;
  const double c = 0.5 * (a + b);
  const double m = std::min({std::abs(c), 2.0 * std::abs(a), 2.0 * std::abs(b)});
  return c > 0.0 ? m : -m;
}

struct Rates {
  ScalarField rho;
  VectorField mom;
};

// Spatial operator of the explicit part: fluxes, interaction force and,
// for explicit friction, the friction source.
Rates spatial_rates(const State& s, const EulerConfig& cfg, const KernelTable& kernel, double floor) {
  const PeriodicGrid& grid = kernel.grid();
  const int d = grid.dim();
  const std::size_t n = grid.size();
  const double gamma = cfg.params.gamma;
  const double scale = cfg.force_scale();
  const double inv_h = 1.0 / grid.cell_size();
  const bool linear = cfg.reconstruction == Reconstruction::Linear;

  Rates r{ScalarField(n, 0.0), VectorField(d, n)};
  // Conserved variables: q[0] = rho, q[1 + b] = m_b.
  const int nv = 1 + d;
  std::vector<const ScalarField*> q(static_cast<std::size_t>(nv));
  q[0] = &s.rho;
  for (int b = 0; b < d; ++b) q[static_cast<std::size_t>(1 + b)] = &s.mom[b];

  std::vector<ScalarField> slope(static_cast<std::size_t>(nv), ScalarField(linear ? n : 0));
  std::vector<ScalarField> flux(static_cast<std::size_t>(nv), ScalarField(n));

  for (int a = 0; a < d; ++a) {
    if (linear) {
      for (int v = 0; v < nv; ++v) {
        const ScalarField& f = *q[static_cast<std::size_t>(v)];
        for (std::size_t i = 0; i < n; ++i) {
          slope[static_cast<std::size_t>(v)][i] =
              mc_slope(f[grid.neighbor(i, a, -1)], f[i], f[grid.neighbor(i, a, 1)]);
        }
      }
    }
    // Face i+1/2 along axis a is stored at index i.
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = grid.neighbor(i, a, 1);
      double uL[3], uR[3];
      for (int v = 0; v < nv; ++v) {
        const ScalarField& f = *q[static_cast<std::size_t>(v)];
        uL[v] = f[i];
        uR[v] = f[j];
        if (linear) {
          uL[v] += 0.5 * slope[static_cast<std::size_t>(v)][i];
          uR[v] -= 0.5 * slope[static_cast<std::size_t>(v)][j];
        }
      }
      double fL[3], fR[3];
      double speed = 0.0;
      for (int side = 0; side < 2; ++side) {
        const double* u = side == 0 ? uL : uR;
        double* f = side == 0 ? fL : fR;
        const double rho = u[0];
        const double vel_a = rho > floor ? u[1 + a] / rho : 0.0;
        const double p = scale * pressure(std::max(rho, 0.0), gamma);
        f[0] = rho > floor ? u[1 + a] : 0.0;
        for (int b = 0; b < d; ++b) f[1 + b] = vel_a * u[1 + b] + (a == b ? p : 0.0);
        const double c = std::sqrt(scale * gamma * std::pow(std::max(rho, 0.0), gamma - 1.0));
        speed = std::max(speed, std::abs(vel_a) + c);
      }
      for (int v = 0; v < nv; ++v) {
        flux[static_cast<std::size_t>(v)][i] = 0.5 * (fL[v] + fR[v]) - 0.5 * speed * (uR[v] - uL[v]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = grid.neighbor(i, a, -1);
      r.rho[i] -= (flux[0][i] - flux[0][im]) * inv_h;
      for (int b = 0; b < d; ++b) {
        const ScalarField& fb = flux[static_cast<std::size_t>(1 + b)];
        r.mom[b][i] -= (fb[i] - fb[im]) * inv_h;
      }
    }
  }

  if (cfg.params.kappa != 0.0) {
    const VectorField force = grad_convolve(kernel, s.rho, cfg.force_backend);
    const double k = scale * cfg.params.kappa;
    for (int b = 0; b < d; ++b) {
      for (std::size_t i = 0; i < n; ++i) r.mom[b][i] -= k * s.rho[i] * force[b][i];
    }
  }
  if (cfg.friction == FrictionTreatment::Explicit) {
    const double rate = cfg.friction_rate();
    for (int b = 0; b < d; ++b) {
      for (std::size_t i = 0; i < n; ++i) r.mom[b][i] -= rate * s.mom[b][i];
    }
  }
  return r;
}

void require_finite(const State& s) {
  for (double v : s.rho) {
    if (!std::isfinite(v)) throw SolverAbort("non-finite state");
  }
  for (const auto& c : s.mom.comp) {
    for (double v : c) {
      if (!std::isfinite(v)) throw SolverAbort("non-finite state");
    }
  }
}

// Clips negative densities and rescales to the pre-clip mass; returns the clipped mass fraction.
double positivity_guard(State& s) {
  double clipped = 0.0, total = 0.0;
  for (double v : s.rho) {
    total += v;
    if (v < 0.0) clipped -= v;
  }
  if (clipped == 0.0) return 0.0;
  double after = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    if (s.rho[i] <= 0.0) {
      s.rho[i] = 0.0;
      for (auto& c : s.mom.comp) c[i] = 0.0;
    }
    after += s.rho[i];
  }
  if (after > 0.0) {
    const double k = total / after;
    for (double& v : s.rho) v *= k;
  }
  return total > 0.0 ? clipped / total : 1.0;
}

State forward_stage(const State& s, const EulerConfig& cfg, const KernelTable& kernel, double dt, double floor,
                    double& clipped) {
  const Rates r = spatial_rates(s, cfg, kernel, floor);
  State out = s;
  for (std::size_t i = 0; i < s.rho.size(); ++i) out.rho[i] += dt * r.rho[i];
  const double damp = cfg.friction == FrictionTreatment::ImplicitSplit ? 1.0 / (1.0 + dt * cfg.friction_rate()) : 1.0;
  for (int b = 0; b < s.mom.dim(); ++b) {
    for (std::size_t i = 0; i < s.rho.size(); ++i) out.mom[b][i] = (s.mom[b][i] + dt * r.mom[b][i]) * damp;
  }
  clipped += positivity_guard(out);
  return out;
}

}  // namespace

State euler_step(const State& s, const EulerConfig& cfg, const KernelTable& kernel, double dt_cap,
                 StepReport* report) {
  const PeriodicGrid& grid = kernel.grid();
  double dt = stable_dt(s, cfg, grid);
  if (cfg.dt_max > 0.0) dt = std::min(dt, cfg.dt_max);
  dt = std::min(dt, dt_cap);
  if (!(dt > 1e-14 * std::max(1.0, cfg.t_end))) throw SolverAbort("time step underflow");

  const double floor = vacuum_floor(s.rho, grid);
  double clipped = 0.0;
  const State s1 = forward_stage(s, cfg, kernel, dt, floor, clipped);
  const State s2 = forward_stage(s1, cfg, kernel, dt, floor, clipped);
  State out = s;
  for (std::size_t i = 0; i < s.rho.size(); ++i) out.rho[i] = 0.5 * (s.rho[i] + s2.rho[i]);
  for (int b = 0; b < s.mom.dim(); ++b) {
    for (std::size_t i = 0; i < s.rho.size(); ++i) out.mom[b][i] = 0.5 * (s.mom[b][i] + s2.mom[b][i]);
  }
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    if (out.rho[i] == 0.0) {
      for (auto& c : out.mom.comp) c[i] = 0.0;
    }
  }
  out.time = s.time + dt;
  require_finite(out);
  if (clipped > 1e-10) throw SolverAbort("positivity guard overuse");
  if (report) {
    report->dt = dt;
    report->clipped_mass_fraction = clipped;
  }
  return out;
}

EulerRun run_euler(const State& s0, const EulerConfig& cfg, const KernelTable& kernel) {
  const PeriodicGrid& grid = kernel.grid();
  cfg.validate(grid.dim());
  validate_state(s0, grid);

  EulerRun run;
  State s = s0;
  EnergyBreakdown e = euler_energy(s, cfg, kernel);
  double dissipation = 0.0;
  run.ledger.append(s.time, e, dissipation);
  run.snapshots.push_back(s);

  const double t0 = s0.time;
  const double t_final = t0 + cfg.t_end;
  const double tol = 1e-12 * std::max(1.0, std::abs(t_final));
  std::size_t next_out = 1;
  while (t_final - s.time > tol) {
    double cap = t_final - s.time;
    if (cfg.snapshot_interval > 0.0) {
      cap = std::min(cap, t0 + next_out * cfg.snapshot_interval - s.time);
    }
    State next = euler_step(s, cfg, kernel, cap);
    ++run.steps;
    const EnergyBreakdown e_next = euler_energy(next, cfg, kernel);
    dissipation += 0.5 * (next.time - s.time) * (e.dissipation_rate + e_next.dissipation_rate);
    run.ledger.append(next.time, e_next, dissipation);
    e = e_next;
    s = std::move(next);

    const bool last = t_final - s.time <= tol;
    bool keep = false;
    if (cfg.snapshot_interval > 0.0) {
      if (std::abs(s.time - (t0 + next_out * cfg.snapshot_interval)) <= tol) {
        ++next_out;
        keep = true;
      }
    } else if (cfg.snapshot_stride > 0 && run.steps % static_cast<std::size_t>(cfg.snapshot_stride) == 0) {
      keep = true;
    }
    if (last) {
      s.time = t_final;
      keep = true;
    }
    if (keep && run.snapshots.back().time != s.time) run.snapshots.push_back(s);
  }
  return run;
}

}  // namespace rflab
