#include "rflab/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "fft.hpp"
#include "rflab/error.hpp"
#include "rflab/io.hpp"

namespace rflab {

namespace detail {

/// Circular convolution with a fixed offset table, directly or through the DFT.
class Circulant {
 public:
  Circulant(const PeriodicGrid& grid, ScalarField table, std::shared_ptr<const RealFft> fft)
      : grid_(grid), table_(std::move(table)), fft_(std::move(fft)) {
    if (fft_) {
      spectrum_ = fft_->forward(table_);
      for (auto& z : spectrum_) z *= grid_.cell_volume();
    }
  }

  const PeriodicGrid& grid() const noexcept { return grid_; }
  const ScalarField& table() const noexcept { return table_; }
  const Spectrum& spectrum() const noexcept { return spectrum_; }

  ScalarField apply(std::span<const double> f, ConvBackend backend) const {
    require_cells(grid_, f.size(), "convolution input");
    return backend == ConvBackend::Spectral ? apply_spectral(f) : apply_direct(f);
  }

 private:
  ScalarField apply_direct(std::span<const double> f) const {
    const int n = grid_.cells_per_axis();
    const double w = grid_.cell_volume();
    ScalarField out(grid_.size(), 0.0);
    // offset[i - j + n - 1] = (i - j) mod n, so the inner loops avoid integer division.
    std::vector<int> offset(2 * static_cast<std::size_t>(n) - 1);
    for (int k = 0; k < 2 * n - 1; ++k) offset[static_cast<std::size_t>(k)] = grid_.wrap(k - (n - 1));
    if (grid_.dim() == 1) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += table_[static_cast<std::size_t>(offset[i - j + n - 1])] * f[j];
        out[static_cast<std::size_t>(i)] = acc * w;
      }
      return out;
    }
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        double acc = 0.0;
        for (int jy = 0; jy < n; ++jy) {
          const double* trow = table_.data() + static_cast<std::size_t>(offset[iy - jy + n - 1]) * n;
          const double* frow = f.data() + static_cast<std::size_t>(jy) * n;
          const int* off = offset.data() + ix + n - 1;
          for (int jx = 0; jx < n; ++jx) acc += trow[off[-jx]] * frow[jx];
        }
        out[static_cast<std::size_t>(iy) * n + ix] = acc * w;
      }
    }
    return out;
  }

  ScalarField apply_spectral(std::span<const double> f) const {
    Spectrum s = fft_->forward(f);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] *= spectrum_[k];
    return fft_->inverse(s);
  }

  PeriodicGrid grid_;
  ScalarField table_;
  std::shared_ptr<const RealFft> fft_;
  Spectrum spectrum_;
};

}  // namespace detail

double origin_cell_average(const PeriodicGrid& grid, double exponent) {
  const int d = grid.dim();
  if (!(exponent > -d)) throw ParameterError("power law not integrable at the origin");
  const double h = grid.cell_size();
  if (d == 1) {
    // (1/h) * 2 * int_0^{h/2} x^e dx
    return 2.0 * std::pow(0.5 * h, exponent + 1.0) / ((exponent + 1.0) * h);
  }
  // Disc of area h^2: (1/h^2) * 2 pi int_0^R r^e r dr.
  const double radius = h / std::sqrt(std::numbers::pi);
  return 2.0 * std::numbers::pi * std::pow(radius, exponent + 2.0) / ((exponent + 2.0) * h * h);
}

ScalarField power_law_table(const PeriodicGrid& grid, double exponent) {
  ScalarField table(grid.size());
  const double h = grid.cell_size();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    auto [kx, ky] = grid.coords(c);
    const double dx = grid.signed_offset(kx) * h;
    const double dy = grid.dim() == 2 ? grid.signed_offset(ky) * h : 0.0;
    const double r = std::hypot(dx, dy);
    table[c] = c == 0 ? origin_cell_average(grid, exponent) : std::pow(r, exponent);
  }
  return table;
}

KernelTable KernelTable::build(const ModelParams& params, const PeriodicGrid& grid) {
  const int d = grid.dim();
  if (!(params.alpha > -d && params.alpha < 0.0)) throw ParameterError("kernel exponent alpha must lie in (-d, 0)");
  if (params.sign != 1 && params.sign != -1) throw ParameterError("kernel sign must be +1 or -1");

  KernelTable k;
  k.alpha_ = params.alpha;
  k.sign_ = params.sign;
  const double scale = params.sign / params.alpha;
  ScalarField values = power_law_table(grid, params.alpha);
  for (double& v : values) v *= scale;

  const double h = grid.cell_size();
  k.grad_values_ = VectorField(d, grid.size());
  for (std::size_t c = 1; c < grid.size(); ++c) {
    auto [kx, ky] = grid.coords(c);
    const int s[2] = {grid.signed_offset(kx), d == 2 ? grid.signed_offset(ky) : 0};
    const double r = std::hypot(s[0] * h, s[1] * h);
    const double radial = params.sign * std::pow(r, params.alpha - 2.0);
    for (int a = 0; a < d; ++a) {
      // Both images of an offset of exactly -L/2 are equidistant; their contributions cancel.
      k.grad_values_[a][c] = grid.is_tie(s[a]) ? 0.0 : s[a] * h * radial;
    }
  }

  auto fft = std::make_shared<const detail::RealFft>(grid);
  k.value_op_ = std::make_shared<const detail::Circulant>(grid, std::move(values), fft);
  for (int a = 0; a < d; ++a) {
    k.grad_ops_.push_back(std::make_shared<const detail::Circulant>(grid, k.grad_values_[a], fft));
  }

  const auto& spec = k.value_op_->spectrum();
  k.symbol_.resize(spec.size());
  double max_re = 0.0, max_im = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    k.symbol_[i] = spec[i].real();
    max_re = std::max(max_re, std::abs(spec[i].real()));
    max_im = std::max(max_im, std::abs(spec[i].imag()));
  }
  k.imag_defect_ = max_re > 0.0 ? max_im / max_re : 0.0;
  return k;
}

const PeriodicGrid& KernelTable::grid() const noexcept { return value_op_->grid(); }
const ScalarField& KernelTable::values() const noexcept { return value_op_->table(); }

double KernelTable::symbol_at(int kx, int ky) const {
  const PeriodicGrid& g = grid();
  const int n = g.cells_per_axis();
  int x = g.wrap(kx);
  int y = g.dim() == 2 ? g.wrap(ky) : 0;
  const int half = n / 2 + 1;
  if (x >= half) {
    // Hermitian symmetry of a real table; the symbol is real, so the conjugate is itself.
    x = g.wrap(-x);
    y = g.dim() == 2 ? g.wrap(-y) : 0;
  }
  return symbol_[static_cast<std::size_t>(y) * half + static_cast<std::size_t>(x)];
}

ScalarField KernelTable::apply(std::span<const double> f, ConvBackend backend) const {
  return value_op_->apply(f, backend);
}

VectorField KernelTable::apply_grad(std::span<const double> f, ConvBackend backend) const {
  VectorField out;
  out.comp.reserve(grad_ops_.size());
  for (const auto& op : grad_ops_) out.comp.push_back(op->apply(f, backend));
  return out;
}

ScalarField convolve(const KernelTable& kernel, std::span<const double> f, ConvBackend backend) {
  return kernel.apply(f, backend);
}

VectorField grad_convolve(const KernelTable& kernel, std::span<const double> f, ConvBackend backend) {
  return kernel.apply_grad(f, backend);
}

ScalarField riesz_potential(const PeriodicGrid& grid, std::span<const double> f, double beta, ConvBackend backend) {
  const int d = grid.dim();
  if (!(beta > 0.0 && beta < d)) throw ParameterError("Riesz degree beta must lie in (0, d)");
  require_cells(grid, f.size(), "riesz_potential");
  for (double v : f) {
    if (!std::isfinite(v)) throw ParameterError("non-finite field");
  }
  std::shared_ptr<const detail::RealFft> fft;
  if (backend == ConvBackend::Spectral) fft = std::make_shared<const detail::RealFft>(grid);
  const detail::Circulant op(grid, power_law_table(grid, beta - d), std::move(fft));
  return op.apply(f, backend);
}

HlsReport hls_check(std::span<const double> f, const ModelParams& params, const PeriodicGrid& grid) {
  require_cells(grid, f.size(), "hls_check");
  for (double v : f) {
    if (v < 0.0) throw ParameterError("hls_check needs a non-negative field");
  }
  const int d = grid.dim();
  const double beta = params.beta(d);
  if (!(beta > 0.0 && beta < d)) throw ParameterError("beta = alpha + d must lie in (0, d)");
  const double p = 2.0 * d / (d + beta);
  const double g0 = 2.0 - beta / d;

  HlsReport r;
  const ScalarField pot = riesz_potential(grid, f, beta);
  ScalarField prod(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) prod[i] = f[i] * pot[i];
  r.lhs = lp_norm(prod, 1.0, grid);
  const double np = lp_norm(f, p, grid);
  r.rhs_p = np * np;
  r.rhs_interp = std::pow(lp_norm(f, 1.0, grid), beta / d) * std::pow(lp_norm(f, g0, grid), g0);
  r.ratio_hls = r.rhs_p > 0.0 ? r.lhs / r.rhs_p : 0.0;
  r.ratio_interp = r.rhs_interp > 0.0 ? r.rhs_p / r.rhs_interp : 0.0;
  return r;
}

void write_kernel_csv(std::ostream& out, const KernelTable& kernel) {
  const PeriodicGrid& g = kernel.grid();
  const bool two = g.dim() == 2;
  out << (two ? "cell_index,x,y,W,gradW_x,gradW_y\n" : "cell_index,x,W,gradW_x\n");
  for (std::size_t c = 0; c < g.size(); ++c) {
    auto [kx, ky] = g.coords(c);
    out << c << ',' << io::format_real(g.signed_offset(kx) * g.cell_size());
    if (two) out << ',' << io::format_real(g.signed_offset(ky) * g.cell_size());
    out << ',' << io::format_real(kernel.values()[c]) << ',' << io::format_real(kernel.grad_values()[0][c]);
    if (two) out << ',' << io::format_real(kernel.grad_values()[1][c]);
    out << '\n';
  }
}

}  // namespace rflab
