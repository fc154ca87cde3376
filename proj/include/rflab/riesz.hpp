#pragma once

// Periodized Riesz interaction kernel W(x) = sign |x|^alpha / alpha on the
// torus, its gradient, the discrete convolutions W*f and gradW*f, the Riesz
// potential I_beta and the HLS inequality audit.
//
// Every kernel is a circulant operator on the cell grid:
//   (T*f)_i = sum_j T(x_i - x_j) f_j h^d
// with x_i - x_j taken as the nearest-image displacement.  The singular
// origin sample is replaced by the exact average of the power law over the
// origin cell (d = 1) or over the disc of equal area (d = 2).

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "rflab/fields.hpp"

namespace rflab {

enum class ConvBackend { Direct, Spectral };

namespace detail {
class Circulant;
}

/// Average of |x|^exponent over the origin cell; needs exponent > -d.
double origin_cell_average(const PeriodicGrid& grid, double exponent);

/// Samples of |x|^exponent at nearest-image offsets, origin handled by origin_cell_average.
ScalarField power_law_table(const PeriodicGrid& grid, double exponent);

class KernelTable {
 public:
  /// Throws ParameterError unless -d < alpha < 0.
  static KernelTable build(const ModelParams& params, const PeriodicGrid& grid);

  const PeriodicGrid& grid() const noexcept;
  double alpha() const noexcept { return alpha_; }
  int sign() const noexcept { return sign_; }

  const ScalarField& values() const noexcept;
  /// Odd table; the origin entry and the equidistant -L/2 components are zero.
  const VectorField& grad_values() const noexcept { return grad_values_; }
  /// Eigenvalues of f -> W*f (h^d times the DFT of `values`), real parts, r2c half-spectrum layout.
  const ScalarField& fourier_symbol() const noexcept { return symbol_; }
  /// max |Im| / max |Re| over the symbol; zero up to roundoff for an even table.
  double symbol_imag_defect() const noexcept { return imag_defect_; }
  /// Eigenvalue for integer wave numbers (kx, ky), any sign.
  double symbol_at(int kx, int ky = 0) const;

  ScalarField apply(std::span<const double> f, ConvBackend backend) const;
  VectorField apply_grad(std::span<const double> f, ConvBackend backend) const;

 private:
  KernelTable() = default;

  double alpha_ = 0.0;
  int sign_ = 1;
  std::shared_ptr<const detail::Circulant> value_op_;
  std::vector<std::shared_ptr<const detail::Circulant>> grad_ops_;
  VectorField grad_values_;
  ScalarField symbol_;
  double imag_defect_ = 0.0;
};

/// g_i = sum_j W(x_i - x_j) f_j h^d.
ScalarField convolve(const KernelTable& kernel, std::span<const double> f,
                     ConvBackend backend = ConvBackend::Spectral);

/// g_i = sum_j gradW(x_i - x_j) f_j h^d.  The spectral path applies the same
/// odd table through the DFT and agrees with the direct sum to roundoff.
VectorField grad_convolve(const KernelTable& kernel, std::span<const double> f,
                          ConvBackend backend = ConvBackend::Direct);

/// I_beta f(x_i) = sum_j |x_i - x_j|^(beta-d) f_j h^d, beta in (0, d).
ScalarField riesz_potential(const PeriodicGrid& grid, std::span<const double> f, double beta,
                            ConvBackend backend = ConvBackend::Direct);

struct HlsReport {
  double lhs = 0.0;         ///< || f I_beta f ||_1
  double rhs_p = 0.0;       ///< || f ||_p^2, p = 2d/(d+beta)
  double rhs_interp = 0.0;  ///< || f ||_1^(beta/d) || f ||_g0^g0, g0 = 2 - beta/d
  double ratio_hls = 0.0;     ///< lhs / rhs_p
  double ratio_interp = 0.0;  ///< rhs_p / rhs_interp
};

/// Evaluates both sides of the HLS chain for a non-negative field.
HlsReport hls_check(std::span<const double> f, const ModelParams& params, const PeriodicGrid& grid);

/// Debug dump: cell_index,x[,y],W,gradW_x[,gradW_y] with nearest-image coordinates.
void write_kernel_csv(std::ostream& out, const KernelTable& kernel);

}  // namespace rflab
