#include "glyphforge/font.hpp"

#include <string_view>

namespace glyphforge::dataset {

namespace {

// Rows top to bottom; '#' is ink.
constexpr std::array<std::array<std::string_view, 7>, kNumClasses> kStandard{{
    {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."},  // 0
    {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."},  // 1
    {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"},  // 2
    {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."},  // 3
    {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."},  // 4
    {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."},  // 5
    {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."},  // 6
    {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."},  // 7
    {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."},  // 8
    {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."},  // 9
    {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // a
    {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."},  // b
    {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."},  // c
    {"###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."},  // d
    {"#####", "#....", "#....", "####.", "#....", "#....", "#####"},  // e
    {"#####", "#....", "#....", "####.", "#....", "#....", "#...."},  // f
    {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"},  // g
    {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // h
    {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."},  // i
    {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."},  // j
    {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"},  // k
    {"#....", "#....", "#....", "#....", "#....", "#....", "#####"},  // l
    {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"},  // m
    {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"},  // n
    {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // o
    {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."},  // p
    {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"},  // q
    {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"},  // r
    {".####", "#....", "#....", ".###.", "....#", "....#", "####."},  // s
    {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."},  // t
    {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // u
    {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."},  // v
    {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."},  // w
    {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"},  // x
    {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."},  // y
    {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"},  // z
}};

// Per-row right shift for the slanted variant.
constexpr std::array<std::size_t, 7> kSlant{2, 2, 1, 1, 1, 0, 0};

}  // namespace

const GlyphFont& GlyphFont::standard() {
  static const GlyphFont font = [] {
    GlyphFont f;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      Glyph g{5, 7, std::vector<std::uint8_t>(35, 0)};
      for (std::size_t y = 0; y < 7; ++y) {
        for (std::size_t x = 0; x < 5; ++x) g.bits[y * 5 + x] = kStandard[c][y][x] == '#';
      }
      f.glyphs_[c] = std::move(g);
    }
    return f;
  }();
  return font;
}

const GlyphFont& GlyphFont::slanted() {
  static const GlyphFont font = [] {
    GlyphFont f;
    const GlyphFont& base = standard();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      Glyph g{7, 7, std::vector<std::uint8_t>(49, 0)};
      const Glyph& src = base.glyph(c);
      for (std::size_t y = 0; y < 7; ++y) {
        for (std::size_t x = 0; x < 5; ++x) g.bits[y * 7 + x + kSlant[y]] = src.bits[y * 5 + x];
      }
      f.glyphs_[c] = std::move(g);
    }
    return f;
  }();
  return font;
}

}  // namespace glyphforge::dataset
