#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "glyphforge/image.hpp"

// Scene-text processing chain: grayscale -> Gaussian blur -> threshold ->
// morphology -> connected components -> character boxes.
namespace glyphforge::imgproc {

// BT.601 luma, rounded and clamped. 1-channel input is returned unchanged.
ImageU8 to_grayscale(const ImageU8& img);

// Replicates a gray image into 3 identical channels; 3-channel input is returned unchanged.
ImageU8 gray_to_rgb(const ImageU8& img);

// Converts to the requested channel count (1 or 3) via to_grayscale / gray_to_rgb.
ImageU8 to_channels(const ImageU8& img, std::size_t channels);

struct GaussianKernel {
  int size = 1;
  double sigma = 0.0;
  std::vector<float> weights;  // size * size, row-major, sums to 1

  float at(int x, int y) const { return weights[static_cast<std::size_t>(y * size + x)]; }
};

// sigma = 0.3 * ((k - 1) / 2 - 1) + 0.8
double gaussian_sigma(int k);

// Throws ConfigError unless k is odd and positive.
GaussianKernel gaussian_kernel(int k);

// Direct 2-D convolution with gaussian_kernel(k), edge-replicated borders,
// each channel independently, rounded to nearest and clamped.
ImageU8 gaussian_blur(const ImageU8& img, int k);

enum class ThresholdMode { binary, inverse };

std::optional<ThresholdMode> parse_threshold_mode(std::string_view text);

// binary: p > limit -> 255 else 0. inverse: p > limit -> 0 else 255.
ImageU8 threshold(const ImageU8& img, std::uint8_t limit, ThresholdMode mode);

enum class MorphOp { erode, dilate, open, close };

// Square se x se structuring element on a {0,255} image. Outside the image,
// erosion sees 255 and dilation sees 0, so regions touching the border keep
// their extent. Throws PreconditionError for non-binary input.
ImageU8 morphology(const ImageU8& img, MorphOp op, int se);

// 8-connected white components, one tight box each, sorted by x then y.
std::vector<BoundingBox> connected_components(const ImageU8& img);

struct SegmentParams {
  int blur_k = 3;
  std::uint8_t limit = 128;
  ThresholdMode mode = ThresholdMode::inverse;
  int se = 3;
  double min_area_frac = 0.001;
  int min_dim = 2;
};

// Character candidates, left to right. Boxes smaller than
// min_area_frac * W * H or thinner than min_dim are dropped.
std::vector<BoundingBox> segment_characters(const ImageU8& img, const SegmentParams& params = {});

// Sub-image covering box grown by pad on every side, clamped to the image.
// Throws BoundsError if the box does not lie inside the image.
ImageU8 crop(const ImageU8& img, const BoundingBox& box, int pad);

// Bilinear resize with pixel-center alignment; same-size resize is an exact copy.
ImageU8 resize_bilinear(const ImageU8& img, std::size_t width, std::size_t height);

// Centers img on a square canvas of side max(w, h) filled with `fill`.
ImageU8 pad_to_square(const ImageU8& img, std::uint8_t fill);

}  // namespace glyphforge::imgproc
