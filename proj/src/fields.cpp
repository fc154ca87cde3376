#include "rflab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "rflab/error.hpp"
#include "rflab/io.hpp"

namespace rflab {

PeriodicGrid::PeriodicGrid(int dim, int cells_per_axis, double length)
    : dim_(dim), n_(cells_per_axis), length_(length) {
  if (dim != 1 && dim != 2) throw ParameterError("grid dimension must be 1 or 2");
  if (cells_per_axis < 4) throw ParameterError("need at least 4 cells per axis");
  if (!(length > 0.0) || !std::isfinite(length)) throw ParameterError("grid length must be positive");
  h_ = length_ / n_;
  volume_ = dim_ == 1 ? h_ : h_ * h_;
  measure_ = dim_ == 1 ? length_ : length_ * length_;
  size_ = dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
}

double PeriodicGrid::nearest_image(double dx) const noexcept {
  double r = std::fmod(dx, length_);
  if (r < -0.5 * length_) r += length_;
  if (r >= 0.5 * length_) r -= length_;
  return r;
}

std::size_t PeriodicGrid::neighbor(std::size_t cell, int axis, int step) const noexcept {
  auto [ix, iy] = coords(cell);
  if (axis == 0) return index(ix + step, iy);
  return index(ix, iy + step);
}

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b) {
  if (!(a == b)) throw GridMismatch("operands live on different grids");
}

void require_cells(const PeriodicGrid& grid, std::size_t cells, const char* what) {
  if (cells != grid.size()) {
    throw GridMismatch(std::string(what) + ": field has " + std::to_string(cells) + " cells, grid has " +
                       std::to_string(grid.size()));
  }
}

void ModelParams::validate(int dim) const {
  if (!(gamma > 1.0)) throw ParameterError("gamma must exceed 1");
  if (!(kappa >= 0.0)) throw ParameterError("kappa must be non-negative");
  if (!(nu >= 0.0)) throw ParameterError("nu must be non-negative");
  if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be non-negative");
  if (!(alpha > -dim && alpha < 0.0)) throw ParameterError("alpha must lie in (-d, 0)");
  if (sign != 1 && sign != -1) throw ParameterError("kernel sign must be +1 or -1");
}

bool ModelParams::theorem_regime(int dim) const noexcept {
  const double b = beta(dim);
  return alpha > 1.0 - dim && alpha < 0.0 && gamma >= 2.0 - b / dim;
}

State State::at_rest(const PeriodicGrid& grid, ScalarField rho, double time) {
  require_cells(grid, rho.size(), "State::at_rest");
  State s;
  s.rho = std::move(rho);
  s.mom = VectorField(grid.dim(), grid.size());
  s.time = time;
  return s;
}

void validate_state(const State& s, const PeriodicGrid& grid) {
  require_cells(grid, s.rho.size(), "density");
  if (s.mom.dim() != grid.dim()) throw GridMismatch("momentum has wrong number of components");
  for (int a = 0; a < grid.dim(); ++a) require_cells(grid, s.mom[a].size(), "momentum");
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    if (!std::isfinite(s.rho[i])) throw SolverAbort("non-finite density");
    if (s.rho[i] < 0.0) throw ParameterError("negative density");
    for (int a = 0; a < grid.dim(); ++a) {
      if (!std::isfinite(s.mom[a][i])) throw SolverAbort("non-finite momentum");
      if (s.rho[i] == 0.0 && s.mom[a][i] != 0.0) throw ParameterError("momentum in vacuum");
    }
  }
  if (!(s.time >= 0.0)) throw ParameterError("negative time");
}

double vacuum_floor(std::span<const double> rho, const PeriodicGrid& grid) {
  return 1e-12 * integral(rho, grid) / grid.measure();
}

VectorField velocity(const State& s, double floor) {
  const int d = s.mom.dim();
  VectorField u(d, s.rho.size());
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    if (s.rho[i] > floor) {
      for (int a = 0; a < d; ++a) u[a][i] = s.mom[a][i] / s.rho[i];
    }
  }
  return u;
}

double lp_norm(std::span<const double> f, double p, const PeriodicGrid& grid) {
  require_cells(grid, f.size(), "lp_norm");
  if (!(p >= 1.0)) throw ParameterError("lp_norm needs p >= 1");
  for (double v : f) {
    if (!std::isfinite(v)) throw ParameterError("non-finite field");
  }
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
  }
  double sum = 0.0;
  if (p == 1.0) {
    for (double v : f) sum += std::abs(v);
    return sum * grid.cell_volume();
  }
  if (p == 2.0) {
    for (double v : f) sum += v * v;
    return std::sqrt(sum * grid.cell_volume());
  }
  for (double v : f) sum += std::pow(std::abs(v), p);
  return std::pow(sum * grid.cell_volume(), 1.0 / p);
}

double integral(std::span<const double> f, const PeriodicGrid& grid) {
  require_cells(grid, f.size(), "integral");
  double sum = 0.0;
  for (double v : f) sum += v;
  return sum * grid.cell_volume();
}

double inner(std::span<const double> f, std::span<const double> g, const PeriodicGrid& grid) {
  require_cells(grid, f.size(), "inner");
  require_cells(grid, g.size(), "inner");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * g[i];
  return sum * grid.cell_volume();
}

double total_mass(const State& s, const PeriodicGrid& grid) { return integral(s.rho, grid); }

VectorField gradient(std::span<const double> f, const PeriodicGrid& grid) {
  require_cells(grid, f.size(), "gradient");
  const double inv = 0.5 / grid.cell_size();
  VectorField g(grid.dim(), grid.size());
  for (int a = 0; a < grid.dim(); ++a) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      g[a][i] = (f[grid.neighbor(i, a, 1)] - f[grid.neighbor(i, a, -1)]) * inv;
    }
  }
  return g;
}

ScalarField divergence(const VectorField& v, const PeriodicGrid& grid) {
  const double inv = 0.5 / grid.cell_size();
  ScalarField out(grid.size(), 0.0);
  for (int a = 0; a < grid.dim(); ++a) {
    require_cells(grid, v[a].size(), "divergence");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out[i] += (v[a][grid.neighbor(i, a, 1)] - v[a][grid.neighbor(i, a, -1)]) * inv;
    }
  }
  return out;
}

ScalarField restrict_average(std::span<const double> fine, const PeriodicGrid& fine_grid, int factor) {
  require_cells(fine_grid, fine.size(), "restrict_average");
  const int nf = fine_grid.cells_per_axis();
  if (factor < 1 || nf % factor != 0) throw ParameterError("refinement factor must divide the fine grid");
  if (factor == 1) return ScalarField(fine.begin(), fine.end());
  const PeriodicGrid coarse(fine_grid.dim(), nf / factor, fine_grid.length());
  ScalarField out(coarse.size(), 0.0);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    auto [ix, iy] = fine_grid.coords(i);
    out[coarse.index(ix / factor, iy / factor)] += fine[i];
  }
  const double w = fine_grid.dim() == 1 ? 1.0 / factor : 1.0 / (factor * factor);
  for (double& v : out) v *= w;
  return out;
}

State restrict_state(const State& fine, const PeriodicGrid& fine_grid, int factor) {
  State s;
  s.rho = restrict_average(fine.rho, fine_grid, factor);
  s.mom.comp.reserve(fine.mom.comp.size());
  for (const auto& c : fine.mom.comp) s.mom.comp.push_back(restrict_average(c, fine_grid, factor));
  s.time = fine.time;
  return s;
}

void write_snapshot_csv(std::ostream& out, const State& s, const PeriodicGrid& grid) {
  validate_state(s, grid);
  const bool two = grid.dim() == 2;
  out << (two ? "cell_index,cell_index_y,x,y,rho,mom_x,mom_y\n" : "cell_index,x,rho,mom_x\n");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto [ix, iy] = grid.coords(i);
    out << ix << ',';
    if (two) out << iy << ',';
    out << io::format_real(grid.center(ix)) << ',';
    if (two) out << io::format_real(grid.center(iy)) << ',';
    out << io::format_real(s.rho[i]) << ',' << io::format_real(s.mom[0][i]);
    if (two) out << ',' << io::format_real(s.mom[1][i]);
    out << '\n';
  }
}

State read_snapshot_csv(std::istream& in, const PeriodicGrid& grid) {
  const bool two = grid.dim() == 2;
  const std::size_t columns = two ? 7 : 4;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty snapshot file");
  if (io::split(line, ',').size() != columns) throw ConfigError("snapshot header does not match grid dimension");
  State s = State::at_rest(grid, ScalarField(grid.size(), 0.0));
  std::vector<bool> seen(grid.size(), false);
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    const auto cols = io::split(line, ',');
    if (cols.size() != columns) throw ConfigError("malformed snapshot row: " + line);
    const int ix = std::stoi(cols[0]);
    const int iy = two ? std::stoi(cols[1]) : 0;
    if (ix < 0 || ix >= grid.cells_per_axis() || iy < 0 || iy >= grid.cells_per_axis()) {
      throw ConfigError("snapshot cell index out of range");
    }
    const std::size_t c = grid.index(ix, iy);
    const std::size_t base = two ? 4 : 2;
    s.rho[c] = io::parse_real(cols[base]);
    s.mom[0][c] = io::parse_real(cols[base + 1]);
    if (two) s.mom[1][c] = io::parse_real(cols[base + 2]);
    seen[c] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw ConfigError("snapshot is missing cells");
  validate_state(s, grid);
  return s;
}

}  // namespace rflab
