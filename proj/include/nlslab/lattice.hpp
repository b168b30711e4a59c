#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace nlslab {

using Complex = std::complex<double>;
using Wavevector = std::array<int, 3>;

// Ball truncation {k in Z^d : |k|^2 <= cutoff} of the torus eigenbasis
// e_k = (2 pi)^{-d/2} exp(i k.x). Modes are ordered by (|k|^2, lexicographic k),
// so index 0 is always the constant mode. Unused components of k are zero.
class Lattice {
 public:
  Lattice(int dimension, double cutoff);

  static std::shared_ptr<const Lattice> make(int dimension, double cutoff) {
    return std::make_shared<const Lattice>(dimension, cutoff);
  }

  int dimension() const { return dimension_; }
  double cutoff() const { return cutoff_; }
  std::size_t size() const { return modes_.size(); }
  const Wavevector& mode(std::size_t n) const { return modes_[n]; }
  double eigenvalue(std::size_t n) const { return eigenvalues_[n]; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  // Largest |k_i| over all modes and components.
  int max_component() const { return max_component_; }

  std::optional<std::size_t> index_of(const Wavevector& k) const;
  // Index of -k; the ball is symmetric so this always exists.
  std::size_t negated(std::size_t n) const { return negated_[n]; }

  bool operator==(const Lattice& other) const;

 private:
  int dimension_;
  double cutoff_;
  int max_component_ = 0;
  std::vector<Wavevector> modes_;
  std::vector<double> eigenvalues_;
  std::vector<std::size_t> negated_;
  std::vector<long> box_index_;  // dense (2K+1)^d lookup, -1 when outside the ball
  long box_offset(const Wavevector& k) const;
};

// Coefficients of a function in span{e_k : k in lattice}.
class SpectralField {
 public:
  explicit SpectralField(std::shared_ptr<const Lattice> lattice);
  SpectralField(std::shared_ptr<const Lattice> lattice, std::vector<Complex> coeffs);

  const Lattice& lattice() const { return *lattice_; }
  const std::shared_ptr<const Lattice>& lattice_ptr() const { return lattice_; }
  std::size_t size() const { return coeffs_.size(); }

  Complex& operator[](std::size_t n) { return coeffs_[n]; }
  const Complex& operator[](std::size_t n) const { return coeffs_[n]; }
  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  std::vector<Complex>& data() { return coeffs_; }
  const std::vector<Complex>& data() const { return coeffs_; }

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(Complex c);

 private:
  std::shared_ptr<const Lattice> lattice_;
  std::vector<Complex> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(Complex c, SpectralField a);

// Throws LatticeMismatch unless both fields share the same lattice.
void require_same_lattice(const SpectralField& a, const SpectralField& b);

// Real L^2 inner product Re int u conj(v) dx.
double inner(const SpectralField& u, const SpectralField& v);

}  // namespace nlslab
