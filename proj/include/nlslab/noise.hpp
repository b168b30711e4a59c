#pragma once

#include <memory>
#include <vector>

#include "nlslab/lattice.hpp"
#include "nlslab/rng.hpp"

namespace nlslab {

// Per-mode noise amplitudes a_k on one lattice.
struct NoiseProfile {
  std::vector<double> amplitudes;

  // a_k = amplitude (1 + lambda_k)^{-decay}. The constant mode is left unforced
  // unless force_mean_mode is set. A negative decay selects decay = d.
  static NoiseProfile power_law(const Lattice& lattice, double decay = -1.0, double amplitude = 1.0,
                                bool force_mean_mode = false);
  static NoiseProfile zero(const Lattice& lattice);

  // A^s = sum lambda_k^s a_k^2. The constant mode counts only for s = 0.
  double sum(const Lattice& lattice, double s) const;
  bool is_zero() const;
};

// Gaussian field with E|u_k|^2 = amplitude^2 (1 + lambda_k)^{-2 decay}.
SpectralField gaussian_field(const std::shared_ptr<const Lattice>& lattice, RandomStream& rng, double decay,
                             double amplitude);

}  // namespace nlslab
