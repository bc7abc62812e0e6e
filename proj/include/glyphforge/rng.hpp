#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "glyphforge/error.hpp"

namespace glyphforge {

// Seedable generator behind every random decision (initialization, splits,
// shuffles, augmentation). Draws come from std::mt19937_64 and are mapped to
// floats with our own arithmetic, so a given seed yields the same sequence on
// every run of the same build.
//
// The (seed, stream) constructor derives independent generators for separate
// purposes from one user seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double unit();

  // Uniform in [lo, hi); returns lo when lo == hi. Throws RangeError if lo > hi.
  float uniform(float lo, float hi);

  // Gaussian draw (Box-Muller, no cached second value). Throws RangeError if std < 0.
  float normal(float mean, float std);

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  // Uniform integer in [lo, hi] inclusive.
  int between(int lo, int hi);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

float rng_uniform(Rng& rng, float lo, float hi);
float rng_normal(Rng& rng, float mean, float std);

}  // namespace glyphforge
