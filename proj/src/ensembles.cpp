#include "rflab/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rflab/error.hpp"

namespace rflab {

namespace {

ScalarField mode_field(const PeriodicGrid& grid, int kx, int ky, double phase) {
  ScalarField f(grid.size());
  const double w = 2.0 * std::numbers::pi / grid.length();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    auto [ix, iy] = grid.coords(c);
    const double y = grid.dim() == 2 ? grid.center(iy) : 0.0;
    f[c] = std::cos(w * (kx * grid.center(ix) + ky * y) + phase);
  }
  return f;
}

ScalarField bump_field(const PeriodicGrid& grid, Rng& rng) {
  const double cx = rng.uniform(0.0, grid.length());
  const double cy = rng.uniform(0.0, grid.length());
  const double width = grid.length() * rng.uniform(0.03, 0.2);
  ScalarField f(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    auto [ix, iy] = grid.coords(c);
    const double dx = grid.nearest_image(grid.center(ix) - cx);
    const double dy = grid.dim() == 2 ? grid.nearest_image(grid.center(iy) - cy) : 0.0;
    f[c] = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
  }
  return f;
}

}  // namespace

ScalarField random_smooth_field(const PeriodicGrid& grid, Rng& rng, int max_mode, double amplitude) {
  if (max_mode < 1) throw ParameterError("random_smooth_field needs max_mode >= 1");
  ScalarField f(grid.size(), 0.0);
  const int ky_max = grid.dim() == 2 ? max_mode : 0;
  for (int ky = 0; ky <= ky_max; ++ky) {
    for (int kx = -max_mode; kx <= max_mode; ++kx) {
      if (ky == 0 && kx <= 0) continue;
      const double weight = rng.uniform(-1.0, 1.0) / std::sqrt(1.0 + kx * kx + ky * ky);
      const auto m = mode_field(grid, kx, ky, rng.uniform(0.0, 2.0 * std::numbers::pi));
      for (std::size_t c = 0; c < f.size(); ++c) f[c] += weight * m[c];
    }
  }
  double peak = 0.0;
  for (double v : f) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : f) v *= amplitude / peak;
  }
  return f;
}

std::vector<ScalarField> random_nonnegative_fields(const PeriodicGrid& grid, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScalarField> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ScalarField f;
    const double level = rng.uniform(0.2, 3.0);
    switch (i % 3) {
      case 0: {
        f = random_smooth_field(grid, rng, rng.integer(1, 4), 0.9);
        for (double& v : f) v = level * (1.0 + v);
        break;
      }
      case 1: {
        f.resize(grid.size());
        for (double& v : f) v = level * rng.uniform();
        break;
      }
      default: {
        f = bump_field(grid, rng);
        for (double& v : f) v *= level;
        break;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<DensityPair> certification_ensemble(const PeriodicGrid& grid, double delta, double Mbar, std::size_t count,
                                                std::uint64_t seed, bool structured) {
  if (!(delta > 0.0) || delta > Mbar) throw ParameterError("need 0 < delta <= Mbar");
  Rng rng(seed);
  const double mid = 0.5 * (delta + Mbar);
  const double half = 0.5 * (Mbar - delta);
  std::vector<DensityPair> out;
  out.reserve(count + 32);

  auto push = [&](ScalarField rho_bar, const ScalarField& pert) {
    DensityPair p;
    p.rho.resize(rho_bar.size());
    for (std::size_t c = 0; c < rho_bar.size(); ++c) p.rho[c] = std::max(0.0, rho_bar[c] + pert[c]);
    p.rho_bar = std::move(rho_bar);
    out.push_back(std::move(p));
  };

  if (structured) {
    for (double level : {delta, mid, Mbar}) {
      const ScalarField bar(grid.size(), level);
      for (double shift : {0.01 * level, -0.01 * level, 0.5 * level, -0.5 * level, Mbar}) {
        push(bar, ScalarField(grid.size(), shift));
      }
      std::vector<std::pair<int, int>> modes = {{1, 0}, {2, 0}};
      if (grid.dim() == 2) modes.insert(modes.end(), {{0, 1}, {1, 1}});
      for (auto [kx, ky] : modes) {
        auto m = mode_field(grid, kx, ky, 0.0);
        for (double amp : {0.01 * level, 0.5 * level}) {
          ScalarField pert(m);
          for (double& v : pert) v *= amp;
          push(bar, pert);
        }
      }
    }
  }

  for (std::size_t i = 0; i < count; ++i) {
    ScalarField bar = random_smooth_field(grid, rng, rng.integer(1, 3), 1.0);
    for (double& v : bar) v = std::clamp(mid + half * v, delta, Mbar);
    ScalarField pert;
    switch (i % 4) {
      case 0:
        pert = random_smooth_field(grid, rng, rng.integer(1, 4), rng.uniform(0.05, 1.5) * Mbar);
        break;
      case 1:
        pert.assign(grid.size(), rng.uniform(-delta, Mbar));
        break;
      case 2: {
        pert.resize(grid.size());
        const double amp = rng.uniform(0.05, 1.0) * Mbar;
        for (double& v : pert) v = amp * rng.uniform(-1.0, 1.0);
        break;
      }
      default: {
        pert = bump_field(grid, rng);
        const double height = rng.uniform(0.1, 5.0) * Mbar;
        for (double& v : pert) v *= height;
        break;
      }
    }
    push(std::move(bar), pert);
  }
  return out;
}

}  // namespace rflab
