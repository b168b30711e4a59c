#pragma once

#include <memory>

#include "nlslab/lattice.hpp"
#include "nlslab/transform.hpp"

namespace nlslab {

// sqrt(sum (1 + lambda_k)^s |u_k|^2).
double sobolev_norm(const SpectralField& u, double s);
// Homogeneous version sqrt(sum_{k != 0} lambda_k^s |u_k|^2).
double sobolev_seminorm(const SpectralField& u, double s);

// Grid quadrature of |u|^p. Exact for even integer p when m > p * K.
double lebesgue_norm(const SpectralField& u, double p, int points);
double lebesgue_norm(const PhysicalGrid& grid, double p);
double sup_norm(const PhysicalGrid& grid);

// lambda_k^gamma u_k, with the constant mode sent to zero for every gamma.
SpectralField frac_laplacian(const SpectralField& u, double gamma);
// (1 + lambda_k)^{sigma/2} u_k.
SpectralField bessel_potential(const SpectralField& u, double sigma);

// Zero the coefficients with lambda_k > cutoff; the carrier lattice is kept.
SpectralField project(const SpectralField& u, double cutoff);
// Copy coefficients onto another lattice of the same dimension: common modes
// are kept, modes missing from the target are dropped, new ones are zero.
SpectralField transfer(const SpectralField& u, std::shared_ptr<const Lattice> target);
// Coefficients of the pointwise conjugate: (conj u)_k = conj(u_{-k}).
SpectralField conjugate(const SpectralField& u);

}  // namespace nlslab
