#pragma once

// Seeded random fields and density-pair ensembles used by the audits and the
// kappa certificate.  Output depends only on the seed.

#include <cstdint>
#include <random>
#include <vector>

#include "rflab/fields.hpp"
#include "rflab/thermo.hpp"

namespace rflab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

 private:
  std::mt19937_64 engine_;
};

/// Sum of random-phase Fourier modes with |k|_inf <= max_mode, scaled so that max |f| = amplitude.
ScalarField random_smooth_field(const PeriodicGrid& grid, Rng& rng, int max_mode, double amplitude);

/// Mixture of smooth, rough (cellwise uniform) and bump-shaped non-negative fields.
std::vector<ScalarField> random_nonnegative_fields(const PeriodicGrid& grid, std::size_t count, std::uint64_t seed);

/// Pairs (rho, rho_bar) with rho_bar in [delta, Mbar] and rho >= 0.  When
/// `structured` is set the ensemble also contains constant shifts and single
/// low Fourier modes at several reference levels, which probe the extreme
/// eigen-directions of the interaction form.
std::vector<DensityPair> certification_ensemble(const PeriodicGrid& grid, double delta, double Mbar, std::size_t count,
                                                std::uint64_t seed, bool structured);

}  // namespace rflab
