#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "glyphforge/image.hpp"

namespace glyphforge::dataset {

// Netpbm binary formats: P5 (gray) and P6 (RGB), maxval 255.
enum class ImageFormat { pgm, ppm };

// Throws FormatError on bad magic, maxval other than 255, or truncated data.
ImageU8 decode_image(std::span<const std::uint8_t> bytes);

// P5 for 1-channel images, P6 for 3-channel ones; a mismatched format is a FormatError.
std::vector<std::uint8_t> encode_image(const ImageU8& img, ImageFormat format);

ImageU8 read_image(const std::filesystem::path& path);
// Picks PGM or PPM from the channel count.
void write_image(const std::filesystem::path& path, const ImageU8& img);

}  // namespace glyphforge::dataset
