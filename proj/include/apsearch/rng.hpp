#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace apsearch {

// Seeded generator shared by every sampling path. std::mt19937_64 is fully
// specified by the standard, and the bounded/real draws below avoid the
// implementation-defined std:: distributions, so streams match across
// platforms for a given seed.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";
  static constexpr std::uint64_t kDefaultSeed = 20140601;

  explicit Rng(std::uint64_t seed = kDefaultSeed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound), bound > 0. Rejection sampling on the top
  // multiple of bound.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace apsearch
