#include "nlslab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlslab/errors.hpp"

namespace nlslab {

Lattice::Lattice(int dimension, double cutoff) : dimension_(dimension), cutoff_(cutoff) {
  if (dimension < 1 || dimension > 3) {
    throw InvalidArgument("lattice dimension must be 1, 2 or 3, got " + std::to_string(dimension));
  }
  if (!(cutoff >= 0.0) || !std::isfinite(cutoff)) {
    throw InvalidArgument("lattice cutoff must be a finite nonnegative number");
  }
  const int K = static_cast<int>(std::floor(std::sqrt(cutoff) + 1e-12));
  const int span = 2 * K + 1;
  const int nx = span;
  const int ny = dimension >= 2 ? span : 1;
  const int nz = dimension >= 3 ? span : 1;

  for (int a = 0; a < nx; ++a) {
    for (int b = 0; b < ny; ++b) {
      for (int c = 0; c < nz; ++c) {
        Wavevector k{a - K, dimension >= 2 ? b - K : 0, dimension >= 3 ? c - K : 0};
        const long n2 = long(k[0]) * k[0] + long(k[1]) * k[1] + long(k[2]) * k[2];
        if (static_cast<double>(n2) <= cutoff) modes_.push_back(k);
      }
    }
  }
  auto norm2 = [](const Wavevector& k) { return long(k[0]) * k[0] + long(k[1]) * k[1] + long(k[2]) * k[2]; };
  std::sort(modes_.begin(), modes_.end(), [&](const Wavevector& x, const Wavevector& y) {
    const long nx2 = norm2(x), ny2 = norm2(y);
    if (nx2 != ny2) return nx2 < ny2;
    return x < y;
  });

  eigenvalues_.reserve(modes_.size());
  for (const auto& k : modes_) {
    eigenvalues_.push_back(static_cast<double>(norm2(k)));
    for (int i = 0; i < dimension; ++i) max_component_ = std::max(max_component_, std::abs(k[i]));
  }

  box_index_.assign(static_cast<std::size_t>(nx) * ny * nz, -1);
  for (std::size_t n = 0; n < modes_.size(); ++n) box_index_[box_offset(modes_[n])] = static_cast<long>(n);
  negated_.resize(modes_.size());
  for (std::size_t n = 0; n < modes_.size(); ++n) {
    const auto& k = modes_[n];
    negated_[n] = *index_of({-k[0], -k[1], -k[2]});
  }
}

long Lattice::box_offset(const Wavevector& k) const {
  const int K = static_cast<int>(std::floor(std::sqrt(cutoff_) + 1e-12));
  const int span = 2 * K + 1;
  long off = 0;
  for (int i = 0; i < dimension_; ++i) {
    if (k[i] < -K || k[i] > K) return -1;
    off = off * span + (k[i] + K);
  }
  for (int i = dimension_; i < 3; ++i) {
    if (k[i] != 0) return -1;
  }
  return off;
}

std::optional<std::size_t> Lattice::index_of(const Wavevector& k) const {
  const long off = box_offset(k);
  if (off < 0) return std::nullopt;
  const long n = box_index_[static_cast<std::size_t>(off)];
  if (n < 0) return std::nullopt;
  return static_cast<std::size_t>(n);
}

bool Lattice::operator==(const Lattice& other) const {
  return dimension_ == other.dimension_ && modes_ == other.modes_;
}

SpectralField::SpectralField(std::shared_ptr<const Lattice> lattice)
    : lattice_(std::move(lattice)), coeffs_(lattice_->size(), Complex{}) {}

SpectralField::SpectralField(std::shared_ptr<const Lattice> lattice, std::vector<Complex> coeffs)
    : lattice_(std::move(lattice)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != lattice_->size()) {
    throw LatticeMismatch("coefficient count " + std::to_string(coeffs_.size()) + " does not match lattice size " +
                          std::to_string(lattice_->size()));
  }
}

void require_same_lattice(const SpectralField& a, const SpectralField& b) {
  if (a.lattice_ptr() == b.lattice_ptr()) return;
  if (!(a.lattice() == b.lattice())) throw LatticeMismatch("fields live on different lattices");
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_lattice(*this, other);
  for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] += other.coeffs_[n];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_lattice(*this, other);
  for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] -= other.coeffs_[n];
  return *this;
}

SpectralField& SpectralField::operator*=(Complex c) {
  for (auto& z : coeffs_) z *= c;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(Complex c, SpectralField a) { return a *= c; }

double inner(const SpectralField& u, const SpectralField& v) {
  require_same_lattice(u, v);
  double acc = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) acc += (u[n] * std::conj(v[n])).real();
  return acc;
}

}  // namespace nlslab
