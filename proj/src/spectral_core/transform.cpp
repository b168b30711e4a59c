#include "nlslab/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "nlslab/errors.hpp"

namespace nlslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread-safe; execution with fftw_execute_dft is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan shared_plan(int dimension, int points, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard lock(plan_mutex());
  const auto key = std::make_tuple(dimension, points, sign);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  std::size_t total = 1;
  int n[3];
  for (int i = 0; i < dimension; ++i) {
    n[i] = points;
    total *= static_cast<std::size_t>(points);
  }
  fftw_complex* scratch = fftw_alloc_complex(total);
  fftw_plan plan = fftw_plan_dft(dimension, n, scratch, scratch, sign, FFTW_ESTIMATE);
  fftw_free(scratch);
  if (plan == nullptr) throw Error("FFTW could not plan a transform of size " + std::to_string(points));
  cache.emplace(key, plan);
  return plan;
}

void require_resolved(const Lattice& lattice, int points) {
  if (points <= 2 * lattice.max_component()) {
    throw UnderResolved("grid of " + std::to_string(points) + " points per axis cannot resolve |k_i| up to " +
                        std::to_string(lattice.max_component()));
  }
}

}  // namespace

double PhysicalGrid::cell_volume() const { return std::pow(kTwoPi / points, dimension); }

int fft_friendly_size(int n) {
  if (n <= 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

int dealiased_points(const Lattice& lattice, double q, int factor) {
  if (factor <= 0) factor = static_cast<int>(std::ceil((2.0 * q + 2.0) / 2.0));
  return fft_friendly_size(factor * (2 * lattice.max_component() + 1));
}

GridTransform::GridTransform(std::shared_ptr<const Lattice> lattice, int points)
    : lattice_(std::move(lattice)), points_(points) {
  require_resolved(*lattice_, points_);
  const int d = lattice_->dimension();
  grid_size_ = 1;
  for (int i = 0; i < d; ++i) grid_size_ *= static_cast<std::size_t>(points_);
  buffer_ = reinterpret_cast<Complex*>(fftw_alloc_complex(grid_size_));
  forward_ = shared_plan(d, points_, FFTW_FORWARD);
  backward_ = shared_plan(d, points_, FFTW_BACKWARD);
  slot_.resize(lattice_->size());
  for (std::size_t n = 0; n < lattice_->size(); ++n) {
    const auto& k = lattice_->mode(n);
    std::size_t off = 0;
    for (int i = 0; i < d; ++i) off = off * points_ + static_cast<std::size_t>(((k[i] % points_) + points_) % points_);
    slot_[n] = off;
  }
}

GridTransform::~GridTransform() { fftw_free(reinterpret_cast<fftw_complex*>(buffer_)); }

double GridTransform::cell_volume() const { return std::pow(kTwoPi / points_, lattice_->dimension()); }

void GridTransform::synthesize(std::span<const Complex> coeffs) {
  const double scale = std::pow(kTwoPi, -0.5 * lattice_->dimension());
  std::fill(buffer_, buffer_ + grid_size_, Complex{});
  for (std::size_t n = 0; n < slot_.size(); ++n) buffer_[slot_[n]] = scale * coeffs[n];
  auto* b = reinterpret_cast<fftw_complex*>(buffer_);
  fftw_execute_dft(static_cast<fftw_plan>(backward_), b, b);
}

void GridTransform::analyze(std::span<Complex> coeffs) {
  auto* b = reinterpret_cast<fftw_complex*>(buffer_);
  fftw_execute_dft(static_cast<fftw_plan>(forward_), b, b);
  const double scale = std::pow(kTwoPi, 0.5 * lattice_->dimension()) / static_cast<double>(grid_size_);
  for (std::size_t n = 0; n < slot_.size(); ++n) coeffs[n] = scale * buffer_[slot_[n]];
}

void GridTransform::analyze_full() {
  auto* b = reinterpret_cast<fftw_complex*>(buffer_);
  fftw_execute_dft(static_cast<fftw_plan>(forward_), b, b);
  const double scale = std::pow(kTwoPi, 0.5 * lattice_->dimension()) / static_cast<double>(grid_size_);
  for (std::size_t j = 0; j < grid_size_; ++j) buffer_[j] *= scale;
}

Wavevector GridTransform::grid_wavevector(std::size_t idx) const {
  Wavevector k{0, 0, 0};
  const int d = lattice_->dimension();
  for (int i = d - 1; i >= 0; --i) {
    int c = static_cast<int>(idx % points_);
    idx /= points_;
    if (c > points_ / 2) c -= points_;
    k[i] = c;
  }
  return k;
}

PhysicalGrid to_physical(const SpectralField& u, int points) {
  GridTransform tr(u.lattice_ptr(), points);
  tr.synthesize(u.coeffs());
  PhysicalGrid g;
  g.dimension = u.lattice().dimension();
  g.points = points;
  g.values.assign(tr.buffer().begin(), tr.buffer().end());
  return g;
}

SpectralField to_spectral(const PhysicalGrid& grid, std::shared_ptr<const Lattice> lattice) {
  if (grid.dimension != lattice->dimension()) throw InvalidArgument("grid and lattice dimensions differ");
  GridTransform tr(lattice, grid.points);
  if (grid.values.size() != tr.grid_size()) throw InvalidArgument("grid value count does not match m^d");
  std::copy(grid.values.begin(), grid.values.end(), tr.buffer().begin());
  SpectralField u(lattice);
  tr.analyze(u.coeffs());
  return u;
}

}  // namespace nlslab
