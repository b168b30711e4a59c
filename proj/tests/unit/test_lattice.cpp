#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlslab/errors.hpp"
#include "nlslab/norms.hpp"
#include "nlslab/transform.hpp"
#include "test_support.hpp"

using namespace nlslab;
using nlslab::testing::random_field;

namespace {

// Direct evaluation of sum_k u_k e_k(x) at one point.
Complex direct_value(const SpectralField& u, const std::array<double, 3>& x) {
  const int d = u.lattice().dimension();
  Complex acc{};
  for (std::size_t n = 0; n < u.size(); ++n) {
    double phase = 0.0;
    for (int i = 0; i < d; ++i) phase += u.lattice().mode(n)[i] * x[i];
    acc += u[n] * std::polar(1.0, phase);
  }
  return acc * std::pow(2.0 * std::numbers::pi, -0.5 * d);
}

}  // namespace

TEST(Lattice, ModeCountsMatchBruteForce) {
  for (int d = 1; d <= 3; ++d) {
    for (double cutoff : {0.0, 1.0, 2.0, 5.0, 10.5}) {
      const int K = static_cast<int>(std::sqrt(cutoff));
      std::size_t count = 0;
      for (int a = -K; a <= K; ++a) {
        for (int b = (d >= 2 ? -K : 0); b <= (d >= 2 ? K : 0); ++b) {
          for (int c = (d >= 3 ? -K : 0); c <= (d >= 3 ? K : 0); ++c) {
            if (a * a + b * b + c * c <= cutoff) ++count;
          }
        }
      }
      EXPECT_EQ(Lattice(d, cutoff).size(), count) << "d=" << d << " cutoff=" << cutoff;
    }
  }
}

TEST(Lattice, SmallCases) {
  EXPECT_EQ(Lattice(1, 1).size(), 3u);
  EXPECT_EQ(Lattice(2, 1).size(), 5u);
  EXPECT_EQ(Lattice(3, 1).size(), 7u);
  EXPECT_EQ(Lattice(2, 2).size(), 9u);
  EXPECT_EQ(Lattice(2, 0).size(), 1u);
}

TEST(Lattice, OrderedByEigenvalueThenLexicographic) {
  Lattice lat(2, 10);
  EXPECT_EQ(lat.eigenvalue(0), 0.0);
  for (std::size_t n = 1; n < lat.size(); ++n) {
    ASSERT_LE(lat.eigenvalue(n - 1), lat.eigenvalue(n));
    if (lat.eigenvalue(n - 1) == lat.eigenvalue(n)) {
      EXPECT_LT(lat.mode(n - 1), lat.mode(n));
    }
  }
  Lattice one(1, 4);
  EXPECT_EQ(one.mode(1)[0], -1);
  EXPECT_EQ(one.mode(2)[0], 1);
}

TEST(Lattice, IndexAndNegation) {
  Lattice lat(3, 6);
  for (std::size_t n = 0; n < lat.size(); ++n) {
    EXPECT_EQ(*lat.index_of(lat.mode(n)), n);
    const auto& k = lat.mode(n);
    const auto& m = lat.mode(lat.negated(n));
    EXPECT_EQ(m[0], -k[0]);
    EXPECT_EQ(m[1], -k[1]);
    EXPECT_EQ(m[2], -k[2]);
  }
  EXPECT_FALSE(lat.index_of({3, 0, 0}).has_value());
}

TEST(Lattice, RejectsBadInput) {
  EXPECT_THROW(Lattice(4, 1), InvalidArgument);
  EXPECT_THROW(Lattice(0, 1), InvalidArgument);
  EXPECT_THROW(Lattice(1, -1), InvalidArgument);
}

TEST(SpectralField, ArithmeticRequiresSameLattice) {
  auto a = Lattice::make(1, 4);
  auto b = Lattice::make(1, 9);
  SpectralField u(a), v(b);
  EXPECT_THROW(u += v, LatticeMismatch);
  EXPECT_THROW(inner(u, v), LatticeMismatch);
  SpectralField w(Lattice::make(1, 4));
  EXPECT_NO_THROW(u += w);
}

TEST(Transform, SynthesisMatchesDirectSum) {
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 3; ++d) {
    auto lat = Lattice::make(d, d == 3 ? 3.0 : 8.0);
    SpectralField u = random_field(lat, rng, 0.0, 1.0);
    const int m = 2 * lat->max_component() + 3;
    PhysicalGrid g = to_physical(u, m);
    ASSERT_EQ(g.size(), static_cast<std::size_t>(std::pow(m, d)));
    for (std::size_t idx : {std::size_t{0}, g.size() / 3, g.size() - 1}) {
      std::array<double, 3> x{0, 0, 0};
      std::size_t r = idx;
      for (int i = d - 1; i >= 0; --i) {
        x[i] = 2.0 * std::numbers::pi * static_cast<double>(r % m) / m;
        r /= m;
      }
      EXPECT_NEAR(std::abs(g.values[idx] - direct_value(u, x)), 0.0, 1e-12);
    }
  }
}

TEST(Transform, RoundTripIsIdentity) {
  std::mt19937_64 rng(3);
  for (int d = 1; d <= 3; ++d) {
    auto lat = Lattice::make(d, d == 1 ? 100.0 : 9.0);
    SpectralField u = random_field(lat, rng, 0.0, 1.0);
    for (int m : {2 * lat->max_component() + 1, dealiased_points(*lat, 1), dealiased_points(*lat, 3)}) {
      SpectralField back = to_spectral(to_physical(u, m), lat);
      double err = 0.0;
      for (std::size_t n = 0; n < u.size(); ++n) err = std::max(err, std::abs(back[n] - u[n]));
      EXPECT_LT(err, 1e-12) << "d=" << d << " m=" << m;
    }
  }
}

TEST(Transform, UnderResolvedGridIsRejected) {
  auto lat = Lattice::make(1, 16);
  SpectralField u(lat);
  EXPECT_THROW(to_physical(u, 8), UnderResolved);
  EXPECT_NO_THROW(to_physical(u, 9));
}

TEST(Transform, DealiasedPointsExceedProductDegree) {
  for (int d = 1; d <= 3; ++d) {
    Lattice lat(d, 20);
    for (int q = 1; q <= 4; ++q) EXPECT_GT(dealiased_points(lat, q), (2 * q + 2) * lat.max_component());
  }
  EXPECT_EQ(fft_friendly_size(97), 98);
  EXPECT_EQ(fft_friendly_size(11), 12);
}

TEST(Norms, SobolevSingleMode) {
  auto lat = Lattice::make(1, 4);
  SpectralField u(lat);
  u[*lat->index_of({1, 0, 0})] = 1.0;
  EXPECT_DOUBLE_EQ(sobolev_norm(u, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(sobolev_norm(u, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sobolev_seminorm(u, 3.0), 1.0);
}

TEST(Norms, LebesgueOfConstant) {
  auto lat = Lattice::make(2, 4);
  SpectralField u(lat);
  const double c = 1.7;  // physical value
  u[0] = c * 2.0 * std::numbers::pi;
  for (double p : {1.0, 2.0, 3.5, 8.0}) {
    EXPECT_NEAR(lebesgue_norm(u, p, 8), c * std::pow(2.0 * std::numbers::pi, 2.0 / p), 1e-12);
  }
}

TEST(Norms, ParsevalOnGrid) {
  std::mt19937_64 rng(5);
  auto lat = Lattice::make(2, 13);
  SpectralField u = random_field(lat, rng, 0.0, 1.0);
  EXPECT_NEAR(lebesgue_norm(u, 2.0, 9), sobolev_norm(u, 0.0), 1e-12);
}

TEST(Norms, EvenLebesgueStableUnderGridDoubling) {
  std::mt19937_64 rng(8);
  for (int q = 1; q <= 3; ++q) {
    auto lat = Lattice::make(1, 64);
    SpectralField u = random_field(lat, rng, 1.0, 1.0);
    const double p = 2.0 * q + 2.0;
    const int m = dealiased_points(*lat, q);
    const double a = lebesgue_norm(u, p, m);
    const double b = lebesgue_norm(u, p, 2 * m);
    EXPECT_LT(std::abs(a - b), 1e-8 * a);
  }
}

TEST(Norms, FractionalLaplacian) {
  std::mt19937_64 rng(1);
  auto lat = Lattice::make(2, 10);
  SpectralField u = random_field(lat, rng, 0.0, 1.0);
  SpectralField zero = frac_laplacian(u, 0.0);
  EXPECT_EQ(zero[0], Complex{});
  for (std::size_t n = 1; n < u.size(); ++n) EXPECT_EQ(zero[n], u[n]);
  SpectralField two = frac_laplacian(frac_laplacian(u, 0.5), 0.5);
  SpectralField one = frac_laplacian(u, 1.0);
  for (std::size_t n = 0; n < u.size(); ++n) EXPECT_NEAR(std::abs(two[n] - one[n]), 0.0, 1e-12);
}

TEST(Norms, ProjectionAndTransfer) {
  std::mt19937_64 rng(2);
  auto big = Lattice::make(2, 25);
  auto small = Lattice::make(2, 9);
  SpectralField u = random_field(big, rng, 0.0, 1.0);
  SpectralField p = project(u, 9);
  SpectralField t = transfer(transfer(u, small), big);
  for (std::size_t n = 0; n < u.size(); ++n) EXPECT_EQ(p[n], t[n]);
  EXPECT_LE(sobolev_norm(p, 1.0), sobolev_norm(u, 1.0));
  SpectralField pp = project(p, 9);
  for (std::size_t n = 0; n < u.size(); ++n) EXPECT_EQ(pp[n], p[n]);
  EXPECT_THROW(transfer(u, Lattice::make(1, 9)), LatticeMismatch);
}

TEST(Norms, ConjugateMatchesPointwise) {
  std::mt19937_64 rng(4);
  auto lat = Lattice::make(2, 8);
  SpectralField u = random_field(lat, rng, 0.0, 1.0);
  PhysicalGrid a = to_physical(u, 9);
  PhysicalGrid b = to_physical(conjugate(u), 9);
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(std::abs(std::conj(a.values[j]) - b.values[j]), 0.0, 1e-12);
}
