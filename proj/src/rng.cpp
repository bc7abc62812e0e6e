#include "glyphforge/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "glyphforge/error.hpp"

namespace glyphforge {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), engine_(splitmix64(seed ^ splitmix64(stream))) {}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

float Rng::uniform(float lo, float hi) {
  if (!(lo <= hi)) {
    throw RangeError("uniform: lo (" + std::to_string(lo) + ") > hi (" + std::to_string(hi) + ")");
  }
  const double u = unit();
  if (lo == hi) return lo;
  auto v = static_cast<float>(lo + (static_cast<double>(hi) - lo) * u);
  // Rounding to float can land exactly on hi.
  if (v >= hi) v = std::nextafter(hi, lo);
  return v;
}

float Rng::normal(float mean, float std) {
  if (!(std >= 0.0f)) throw RangeError("normal: negative standard deviation");
  const double u1 = 1.0 - unit();  // (0, 1]
  const double u2 = unit();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return static_cast<float>(mean + std * z);
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw RangeError("below: empty range");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

int Rng::between(int lo, int hi) {
  if (lo > hi) throw RangeError("between: lo > hi");
  return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo) + 1));
}

float rng_uniform(Rng& rng, float lo, float hi) { return rng.uniform(lo, hi); }
float rng_normal(Rng& rng, float mean, float std) { return rng.normal(mean, std); }

}  // namespace glyphforge
