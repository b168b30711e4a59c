#include "nlslab/norms.hpp"

#include <cmath>
#include <string>

#include "nlslab/errors.hpp"

namespace nlslab {

namespace {

double finite_or_throw(double value, const char* what) {
  if (!std::isfinite(value)) throw Overflow(std::string(what) + " is not representable", value);
  return value;
}

}  // namespace

double sobolev_norm(const SpectralField& u, double s) {
  const auto& lam = u.lattice().eigenvalues();
  double acc = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) acc += std::pow(1.0 + lam[n], s) * std::norm(u[n]);
  return finite_or_throw(std::sqrt(acc), "Sobolev norm");
}

double sobolev_seminorm(const SpectralField& u, double s) {
  const auto& lam = u.lattice().eigenvalues();
  double acc = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (lam[n] > 0.0) acc += std::pow(lam[n], s) * std::norm(u[n]);
  }
  return finite_or_throw(std::sqrt(acc), "Sobolev seminorm");
}

double lebesgue_norm(const PhysicalGrid& grid, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("Lebesgue exponent must be >= 1");
  if (std::isinf(p)) return sup_norm(grid);
  double acc = 0.0;
  for (const auto& z : grid.values) acc += std::pow(std::abs(z), p);
  return finite_or_throw(std::pow(acc * grid.cell_volume(), 1.0 / p), "Lebesgue norm");
}

double lebesgue_norm(const SpectralField& u, double p, int points) {
  return lebesgue_norm(to_physical(u, points), p);
}

double sup_norm(const PhysicalGrid& grid) {
  double m = 0.0;
  for (const auto& z : grid.values) m = std::max(m, std::abs(z));
  return m;
}

SpectralField frac_laplacian(const SpectralField& u, double gamma) {
  SpectralField out(u.lattice_ptr());
  const auto& lam = u.lattice().eigenvalues();
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (lam[n] > 0.0) out[n] = std::pow(lam[n], gamma) * u[n];
  }
  return out;
}

SpectralField bessel_potential(const SpectralField& u, double sigma) {
  SpectralField out(u.lattice_ptr());
  const auto& lam = u.lattice().eigenvalues();
  for (std::size_t n = 0; n < u.size(); ++n) out[n] = std::pow(1.0 + lam[n], 0.5 * sigma) * u[n];
  return out;
}

SpectralField project(const SpectralField& u, double cutoff) {
  if (!(cutoff >= 0.0)) throw InvalidArgument("projection cutoff must be nonnegative");
  SpectralField out = u;
  const auto& lam = u.lattice().eigenvalues();
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (lam[n] > cutoff) out[n] = Complex{};
  }
  return out;
}

SpectralField transfer(const SpectralField& u, std::shared_ptr<const Lattice> target) {
  if (target->dimension() != u.lattice().dimension()) {
    throw LatticeMismatch("cannot transfer between dimensions " + std::to_string(u.lattice().dimension()) + " and " +
                          std::to_string(target->dimension()));
  }
  SpectralField out(target);
  const Lattice& from = u.lattice();
  for (std::size_t n = 0; n < target->size(); ++n) {
    if (auto idx = from.index_of(target->mode(n))) out[n] = u[*idx];
  }
  return out;
}

SpectralField conjugate(const SpectralField& u) {
  SpectralField out(u.lattice_ptr());
  for (std::size_t n = 0; n < u.size(); ++n) out[n] = std::conj(u[u.lattice().negated(n)]);
  return out;
}

}  // namespace nlslab
