#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "glyphforge/image.hpp"
#include "glyphforge/rng.hpp"
#include "glyphforge/tensor.hpp"

namespace glyphforge::augment {

// Rotates counterclockwise (as displayed) about the image center by inverse
// mapping with bilinear sampling. Output pixels whose source falls outside
// the image are 0. Dimensions are unchanged.
ImageU8 rotate(const ImageU8& img, double degrees);

struct RandomRotation {
  float max_degrees = 0.0f;
};

// Crop window side = round(s * side) for s ~ U[lo, hi], placed uniformly,
// then resized to target_size x target_size.
struct RandomScaleCrop {
  float lo = 1.0f;
  float hi = 1.0f;
  std::size_t target_size = 128;
};

// Independent draws, applied blur first then grayscale.
struct RandomEffect {
  float blur_prob = 0.0f;
  float grayscale_prob = 0.0f;
  int blur_kernel = 3;
};

struct Resize {
  std::size_t size = 128;
};

struct ConvertChannels {
  std::size_t channels = 3;
};

// One value per channel, or a single value shared by every channel.
struct Normalize {
  std::vector<float> mean{0.5f};
  std::vector<float> std{0.5f};
};

using Step = std::variant<RandomRotation, RandomScaleCrop, RandomEffect, Resize, ConvertChannels, Normalize>;

ImageU8 random_rotation(const RandomRotation& step, const ImageU8& img, Rng& rng);
ImageU8 random_scale_crop(const RandomScaleCrop& step, const ImageU8& img, Rng& rng);
ImageU8 random_effect(const RandomEffect& step, const ImageU8& img, Rng& rng);

// (p / 255 - mean_c) / std_c into a [C, H, W] tensor.
Tensor to_tensor_normalize(const ImageU8& img, std::span<const float> mean, std::span<const float> std);

// Mirrors the aug.* configuration keys.
struct AugmentConfig {
  float rotation_degrees = 0.0f;
  float scale_lo = 0.8f;
  float scale_hi = 1.0f;
  float blur_prob = 0.0f;
  float grayscale_prob = 0.0f;
  int blur_kernel = 3;
  std::size_t image_size = 128;
  std::size_t channels = 3;
  std::vector<float> norm_mean{0.5f};
  std::vector<float> norm_std{0.5f};
};

// rotation -> scale-crop -> effect -> resize -> channels -> normalize. Steps
// that would be identities (0 degrees, scale [1,1], zero probabilities) are omitted.
std::vector<Step> training_steps(const AugmentConfig& cfg);

// resize -> channels -> normalize; no randomness.
std::vector<Step> eval_steps(const AugmentConfig& cfg);

// Ordered transforms plus the generator they draw from. Single consumer: give
// each worker its own pipeline (seed = base + worker index).
class AugmentPipeline {
 public:
  // Throws ConfigError for out-of-range step parameters or a missing final Normalize.
  AugmentPipeline(std::vector<Step> steps, std::uint64_t seed);

  Tensor apply(const ImageU8& img);
  const std::vector<Step>& steps() const noexcept { return steps_; }
  bool randomized() const;

 private:
  std::vector<Step> steps_;
  Rng rng_;
};

inline Tensor apply_pipeline(AugmentPipeline& pipeline, const ImageU8& img) { return pipeline.apply(img); }

}  // namespace glyphforge::augment
