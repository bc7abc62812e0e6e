#include "glyphforge/codec.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace glyphforge::dataset {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then reads a decimal integer.
  std::size_t number() {
    skip_space();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (++digits > 9) throw FormatError("image header value too large");
    }
    if (digits == 0) throw FormatError("malformed image header");
    return value;
  }

  // Exactly one whitespace byte separates the header from the raster.
  void end_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw FormatError("malformed image header");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageU8 decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("unsupported image format (expected P5 or P6)");
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader header(bytes);
  header.advance(2);
  const std::size_t width = header.number();
  const std::size_t height = header.number();
  const std::size_t maxval = header.number();
  if (maxval != 255) throw FormatError("unsupported maxval " + std::to_string(maxval) + " (expected 255)");
  if (width == 0 || height == 0) throw FormatError("image has a zero dimension");
  header.end_header();
  const std::size_t needed = width * height * channels;
  if (bytes.size() - header.pos() < needed) {
    throw FormatError("truncated raster: expected " + std::to_string(needed) + " bytes, found " +
                      std::to_string(bytes.size() - header.pos()));
  }
  auto raster = bytes.subspan(header.pos(), needed);
  return ImageU8(width, height, channels, std::vector<std::uint8_t>(raster.begin(), raster.end()));
}

std::vector<std::uint8_t> encode_image(const ImageU8& img, ImageFormat format) {
  const std::size_t channels = format == ImageFormat::pgm ? 1 : 3;
  if (img.empty() || img.channels() != channels) {
    throw FormatError("image with " + std::to_string(img.channels()) + " channels cannot be written as " +
                      (format == ImageFormat::pgm ? "PGM" : "PPM"));
  }
  const std::string header = std::string(format == ImageFormat::pgm ? "P5" : "P6") + "\n" +
                             std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

ImageU8 read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_image(const std::filesystem::path& path, const ImageU8& img) {
  const auto bytes = encode_image(img, img.channels() == 1 ? ImageFormat::pgm : ImageFormat::ppm);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace glyphforge::dataset
