#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace nlslab {

// Counter-based stream: the n-th draw is splitmix64(key + n * golden), so a
// stream is fully determined by (key, counter) and keys split by hashing.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) : key_(mix(key)) {}

  // Independent stream for one (seed, path) pair.
  static RandomStream derive(std::uint64_t seed, std::uint64_t path) {
    return RandomStream(mix(seed) ^ mix(path + 0x632BE59BD9B4E019ULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

  double normal() { return normal_(*this); }
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_;
};

}  // namespace nlslab
