#pragma once

#include <cmath>
#include <random>

#include "nlslab/lattice.hpp"

namespace nlslab::testing {

// Gaussian coefficients with variance amplitude^2 (1 + lambda)^{-2 decay}.
// A real field is produced by symmetrizing u_{-k} = conj(u_k).
inline SpectralField random_field(const std::shared_ptr<const Lattice>& lat, std::mt19937_64& rng, double decay,
                                  double amplitude, bool real = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  SpectralField u(lat);
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double sd = amplitude * std::pow(1.0 + lat->eigenvalue(n), -decay);
    u[n] = Complex(g(rng), g(rng)) * (sd / std::sqrt(2.0));
  }
  if (real) {
    SpectralField r(lat);
    for (std::size_t n = 0; n < u.size(); ++n) r[n] = 0.5 * (u[n] + std::conj(u[lat->negated(n)]));
    return r;
  }
  return u;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

}  // namespace nlslab::testing
