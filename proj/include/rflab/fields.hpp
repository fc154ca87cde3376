#pragma once

// Grids, state containers, model parameters, discrete norms and the small
// amount of field arithmetic shared by the solvers and diagnostics.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace rflab {

using ScalarField = std::vector<double>;

/// d-component cell field, stored component-major.
struct VectorField {
  std::vector<ScalarField> comp;

  VectorField() = default;
  VectorField(int dim, std::size_t cells, double value = 0.0)
      : comp(static_cast<std::size_t>(dim), ScalarField(cells, value)) {}

  int dim() const noexcept { return static_cast<int>(comp.size()); }
  std::size_t cells() const noexcept { return comp.empty() ? 0 : comp.front().size(); }
  ScalarField& operator[](int a) { return comp[static_cast<std::size_t>(a)]; }
  const ScalarField& operator[](int a) const { return comp[static_cast<std::size_t>(a)]; }
};

/// Uniform Cartesian mesh of the torus [0,L)^d, d in {1,2}.
///
/// Cells are stored row-major with x fastest: cell = iy * N + ix.  The cell
/// with index 0 doubles as the origin of offset tables used by the
/// convolution kernels: an offset cell k sits at the nearest-image
/// displacement signed_offset(k) * h.
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int cells_per_axis, double length = 1.0);

  int dim() const noexcept { return dim_; }
  int cells_per_axis() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double cell_size() const noexcept { return h_; }
  double cell_volume() const noexcept { return volume_; }
  /// L^d, computed directly rather than as N^d * h^d.
  double measure() const noexcept { return measure_; }
  std::size_t size() const noexcept { return size_; }

  double center(int i) const noexcept { return (i + 0.5) * h_; }
  int wrap(int i) const noexcept { return ((i % n_) + n_) % n_; }
  /// Nearest-image representative of an index offset, in [-N/2, N/2).
  int signed_offset(int k) const noexcept {
    const int w = wrap(k);
    return 2 * w < n_ ? w : w - n_;
  }
  /// True for the offset -N/2 of an even grid, whose two images are equidistant.
  bool is_tie(int signed_k) const noexcept { return n_ % 2 == 0 && signed_k == -n_ / 2; }
  /// Nearest-image displacement, each component in [-L/2, L/2).
  double nearest_image(double dx) const noexcept;

  std::size_t index(int ix, int iy = 0) const noexcept {
    return static_cast<std::size_t>(wrap(iy)) * (dim_ == 2 ? n_ : 0) + static_cast<std::size_t>(wrap(ix));
  }
  std::array<int, 2> coords(std::size_t cell) const noexcept {
    return {static_cast<int>(cell % n_), dim_ == 2 ? static_cast<int>(cell / n_) : 0};
  }
  /// Neighbour of `cell` shifted by `step` cells along `axis`.
  std::size_t neighbor(std::size_t cell, int axis, int step) const noexcept;

  bool operator==(const PeriodicGrid& other) const noexcept {
    return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
  }

 private:
  int dim_;
  int n_;
  double length_;
  double h_;
  double volume_;
  double measure_;
  std::size_t size_;
};

/// Throws GridMismatch unless both grids coincide.
void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b);
/// Throws GridMismatch unless the field has one entry per cell.
void require_cells(const PeriodicGrid& grid, std::size_t cells, const char* what);

struct ModelParams {
  double gamma = 2.0;    ///< adiabatic exponent, > 1
  double kappa = 0.0;    ///< interaction strength
  double nu = 0.0;       ///< collision frequency (unscaled regime)
  double epsilon = 0.0;  ///< relaxation parameter 1/nu^2 (scaled regime)
  double alpha = -0.5;   ///< kernel exponent, in (-d, 0)
  int sign = +1;         ///< W(x) = sign * |x|^alpha / alpha

  double beta(int dim) const noexcept { return alpha + dim; }
  /// Throws ParameterError on values outside their admissible ranges.
  void validate(int dim) const;
  /// 1-d < alpha < 0 and gamma >= 2 - beta/d: the hypotheses of both stability theorems.
  bool theorem_regime(int dim) const noexcept;
};

/// Cell-averaged density and momentum at one time.
struct State {
  ScalarField rho;
  VectorField mom;
  double time = 0.0;

  static State at_rest(const PeriodicGrid& grid, ScalarField rho, double time = 0.0);
};

/// Throws on negative density, momentum in vacuum, wrong sizes or non-finite values.
void validate_state(const State& s, const PeriodicGrid& grid);

/// 1e-12 times the mean density; velocities below it are treated as zero.
double vacuum_floor(std::span<const double> rho, const PeriodicGrid& grid);
/// u = m / rho where rho exceeds the floor, 0 elsewhere.
VectorField velocity(const State& s, double floor);

/// (sum |f_i|^p h^d)^(1/p); p = infinity gives max |f_i|.
double lp_norm(std::span<const double> f, double p, const PeriodicGrid& grid);
double integral(std::span<const double> f, const PeriodicGrid& grid);
double inner(std::span<const double> f, std::span<const double> g, const PeriodicGrid& grid);
double total_mass(const State& s, const PeriodicGrid& grid);

/// Second-order centred difference of a cell field.
VectorField gradient(std::span<const double> f, const PeriodicGrid& grid);
/// Centred divergence of a cell vector field.
ScalarField divergence(const VectorField& v, const PeriodicGrid& grid);

/// Restriction by block averaging from a grid refined `factor` times.
ScalarField restrict_average(std::span<const double> fine, const PeriodicGrid& fine_grid, int factor);
State restrict_state(const State& fine, const PeriodicGrid& fine_grid, int factor);

/// Snapshot CSV: cell_index[,cell_index_y],x[,y],rho,mom_x[,mom_y].
void write_snapshot_csv(std::ostream& out, const State& s, const PeriodicGrid& grid);
State read_snapshot_csv(std::istream& in, const PeriodicGrid& grid);

}  // namespace rflab
