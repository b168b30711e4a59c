#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "nlslab/lattice.hpp"

namespace nlslab {

// Point values on the uniform m^d grid x_j = 2 pi j / m, row-major in j.
struct PhysicalGrid {
  int dimension = 1;
  int points = 0;  // m per axis
  std::vector<Complex> values;

  std::size_t size() const { return values.size(); }
  // Quadrature weight (2 pi / m)^d of one cell.
  double cell_volume() const;
};

// Smallest 2^a 3^b 5^c 7^e not below n.
int fft_friendly_size(int n);

// Zero-pad factor ceil((2q+2)/2) applied to the 2K+1 lattice span. The result
// exceeds (2q+2)K, so products of degree 2q+2 integrate exactly on the grid.
int dealiased_points(const Lattice& lattice, double q, int factor = 0);

// Transform workspace bound to one (lattice, m) pair. It owns an aligned
// buffer and must stay confined to one thread; FFTW plans are shared.
class GridTransform {
 public:
  GridTransform(std::shared_ptr<const Lattice> lattice, int points);
  ~GridTransform();
  GridTransform(const GridTransform&) = delete;
  GridTransform& operator=(const GridTransform&) = delete;

  const Lattice& lattice() const { return *lattice_; }
  int points() const { return points_; }
  std::size_t grid_size() const { return grid_size_; }
  double cell_volume() const;

  std::span<Complex> buffer() { return {buffer_, grid_size_}; }

  // buffer <- point values of sum_k coeffs[k] e_k.
  void synthesize(std::span<const Complex> coeffs);
  // coeffs <- lattice coefficients of the grid function in buffer (exact
  // projection for band-limited content below m/2). The buffer is clobbered.
  void analyze(std::span<Complex> coeffs);
  // In place: buffer <- coefficients against e_k for every grid wavenumber,
  // stored at the FFT position of k. Used where content exceeds the lattice.
  void analyze_full();
  // Wavevector of FFT position idx, components folded into (-m/2, m/2].
  Wavevector grid_wavevector(std::size_t idx) const;

 private:
  std::shared_ptr<const Lattice> lattice_;
  int points_;
  std::size_t grid_size_;
  Complex* buffer_;
  void* forward_;
  void* backward_;
  std::vector<std::size_t> slot_;  // lattice mode -> FFT position
};

PhysicalGrid to_physical(const SpectralField& u, int points);
SpectralField to_spectral(const PhysicalGrid& grid, std::shared_ptr<const Lattice> lattice);

}  // namespace nlslab
