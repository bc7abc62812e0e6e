#include "glyphforge/image.hpp"

#include <string>

namespace glyphforge {

namespace {

void check_dims(std::size_t width, std::size_t height, std::size_t channels) {
  if (width == 0 || height == 0) throw ShapeError("image dimensions must be positive");
  if (channels != 1 && channels != 3) {
    throw ShapeError("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

}  // namespace

ImageU8::ImageU8(std::size_t width, std::size_t height, std::size_t channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  pixels_.assign(width * height * channels, fill);
}

ImageU8::ImageU8(std::size_t width, std::size_t height, std::size_t channels,
                 std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  check_dims(width, height, channels);
  if (pixels_.size() != width * height * channels) {
    throw ShapeError("pixel buffer has " + std::to_string(pixels_.size()) + " bytes, expected " +
                     std::to_string(width * height * channels));
  }
}

}  // namespace glyphforge
