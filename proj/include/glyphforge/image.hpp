#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "glyphforge/error.hpp"

namespace glyphforge {

// 8-bit image, row-major with interleaved channels (1 = gray, 3 = RGB).
class ImageU8 {
 public:
  ImageU8() = default;
  ImageU8(std::size_t width, std::size_t height, std::size_t channels, std::uint8_t fill = 0);
  ImageU8(std::size_t width, std::size_t height, std::size_t channels,
          std::vector<std::uint8_t> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return pixels_[(y * width_ + x) * channels_ + c];
  }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels_[(y * width_ + x) * channels_ + c];
  }

  std::vector<std::uint8_t>& pixels() noexcept { return pixels_; }
  const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }

  friend bool operator==(const ImageU8&, const ImageU8&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int area() const { return w * h; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

}  // namespace glyphforge
