#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "rflab/error.hpp"

namespace rflab::detail {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(const PeriodicGrid& grid) {
  const int n = grid.cells_per_axis();
  real_size_ = grid.size();
  spectrum_size_ = grid.dim() == 1 ? static_cast<std::size_t>(n / 2 + 1)
                                   : static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
  std::vector<double> in(real_size_);
  std::vector<std::complex<double>> out(spectrum_size_);
  auto* cin = reinterpret_cast<fftw_complex*>(out.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  if (grid.dim() == 1) {
    forward_plan_ = fftw_plan_dft_r2c_1d(n, in.data(), cin, flags);
    inverse_plan_ = fftw_plan_dft_c2r_1d(n, cin, in.data(), flags | FFTW_DESTROY_INPUT);
  } else {
    forward_plan_ = fftw_plan_dft_r2c_2d(n, n, in.data(), cin, flags);
    inverse_plan_ = fftw_plan_dft_c2r_2d(n, n, cin, in.data(), flags | FFTW_DESTROY_INPUT);
  }
  if (!forward_plan_ || !inverse_plan_) throw Error("FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

Spectrum RealFft::forward(std::span<const double> f) const {
  std::vector<double> in(f.begin(), f.end());
  Spectrum out(spectrum_size_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

ScalarField RealFft::inverse(const Spectrum& s) const {
  Spectrum work = s;
  ScalarField out(real_size_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(work.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(real_size_);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace rflab::detail
