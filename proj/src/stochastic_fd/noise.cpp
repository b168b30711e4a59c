#include "nlslab/noise.hpp"

#include <algorithm>
#include <cmath>

#include "nlslab/errors.hpp"

namespace nlslab {

NoiseProfile NoiseProfile::power_law(const Lattice& lattice, double decay, double amplitude, bool force_mean_mode) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw InvalidArgument("noise amplitude must be nonnegative");
  const double p = decay < 0.0 ? static_cast<double>(lattice.dimension()) : decay;
  NoiseProfile out;
  out.amplitudes.resize(lattice.size());
  for (std::size_t n = 0; n < lattice.size(); ++n) {
    const double lam = lattice.eigenvalue(n);
    out.amplitudes[n] = (lam == 0.0 && !force_mean_mode) ? 0.0 : amplitude * std::pow(1.0 + lam, -p);
  }
  return out;
}

NoiseProfile NoiseProfile::zero(const Lattice& lattice) {
  NoiseProfile out;
  out.amplitudes.assign(lattice.size(), 0.0);
  return out;
}

double NoiseProfile::sum(const Lattice& lattice, double s) const {
  if (amplitudes.size() != lattice.size()) throw LatticeMismatch("noise profile does not match the lattice");
  double acc = 0.0;
  for (std::size_t n = 0; n < lattice.size(); ++n) {
    const double lam = lattice.eigenvalue(n);
    const double a2 = amplitudes[n] * amplitudes[n];
    if (lam == 0.0) {
      if (s == 0.0) acc += a2;
    } else {
      acc += std::pow(lam, s) * a2;
    }
  }
  return acc;
}

bool NoiseProfile::is_zero() const {
  return std::all_of(amplitudes.begin(), amplitudes.end(), [](double a) { return a == 0.0; });
}

SpectralField gaussian_field(const std::shared_ptr<const Lattice>& lattice, RandomStream& rng, double decay,
                             double amplitude) {
  SpectralField u(lattice);
  const double scale = std::sqrt(0.5);
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double sd = amplitude * std::pow(1.0 + lattice->eigenvalue(n), -decay) * scale;
    const double re = rng.normal();
    const double im = rng.normal();
    u[n] = Complex(sd * re, sd * im);
  }
  return u;
}

}  // namespace nlslab
