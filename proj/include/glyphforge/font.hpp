#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace glyphforge::dataset {

inline constexpr std::size_t kNumClasses = 36;

struct Glyph {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 1 = ink

  bool ink(std::size_t x, std::size_t y) const { return bits[y * width + x] != 0; }
};

// One bitmap per class id (digits 0-9, then letters a-z).
class GlyphFont {
 public:
  // 5x7 block capitals and digits. Every glyph spans all 7 rows and is a
  // single 8-connected shape.
  static const GlyphFont& standard();
  // The standard font sheared to the right (7x7), used as a second domain.
  static const GlyphFont& slanted();

  const Glyph& glyph(std::size_t class_id) const { return glyphs_.at(class_id); }
  std::size_t cell_width() const { return glyphs_[0].width; }
  std::size_t cell_height() const { return glyphs_[0].height; }

 private:
  std::array<Glyph, kNumClasses> glyphs_;
};

}  // namespace glyphforge::dataset
