#pragma once

// Thin RAII wrapper over FFTW real-to-complex transforms on a periodic grid.

#include <complex>
#include <span>
#include <vector>

#include "rflab/fields.hpp"

namespace rflab::detail {

using Spectrum = std::vector<std::complex<double>>;

class RealFft {
 public:
  explicit RealFft(const PeriodicGrid& grid);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t spectrum_size() const noexcept { return spectrum_size_; }
  /// Unnormalised forward transform (half spectrum, last axis).
  Spectrum forward(std::span<const double> f) const;
  /// Inverse transform including the 1/N^d normalisation.
  ScalarField inverse(const Spectrum& s) const;

 private:
  std::size_t real_size_;
  std::size_t spectrum_size_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace rflab::detail
