#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glyphforge/codec.hpp"
#include "glyphforge/font.hpp"
#include "glyphforge/image.hpp"

namespace glyphforge::dataset {

// '0'..'9' -> 0..9, 'a'..'z' -> 10..35; letters are case-folded.
int label_map(char c);
char id_to_char(int id);

enum class Split { train, val, test };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

struct Sample {
  ImageU8 image;
  int label = 0;
  Split split = Split::train;
  std::string path;  // empty for generated samples
};

struct Dataset {
  std::vector<Sample> samples;

  std::vector<std::size_t> indices(Split split) const;
};

// Stratified 80/10/10 assignment: each class's samples, in their current
// order, are shuffled with the seed and the first round(0.8n) go to train,
// the next round(0.1n) to val, the rest to test.
void assign_splits(Dataset& data, std::uint64_t seed);

// Loads <root>/<class-char>/<file>.pgm|ppm in sorted path order. Directories
// that are not a single alphanumeric character and undecodable files are
// skipped with a warning on stderr. Throws DatasetError when nothing loads.
Dataset load_class_dirs(const std::filesystem::path& root, std::uint64_t seed);

// CSV "path,label,split" with a header line.
void write_manifest(const Dataset& data, const std::filesystem::path& path);

// Writes the dataset as class directories readable by load_class_dirs.
void write_class_dirs(const Dataset& data, const std::filesystem::path& root);

enum class Polarity { dark_on_light, light_on_dark };

// Renders one glyph scaled by `scale` (nearest neighbour) with its cell's
// top-left corner at (x, y) onto a size x size gray canvas.
ImageU8 render_glyph(const GlyphFont& font, int class_id, std::size_t size, std::size_t scale, int x, int y,
                     std::uint8_t ink, std::uint8_t paper);

// Scale used by synth_glyphs: the largest integer that fits the glyph cell
// inside a margin of size/16 on each side.
std::size_t glyph_scale(const GlyphFont& font, std::size_t image_size);

struct GlyphJitter {
  int max_offset = 2;  // cell position varies by up to this many pixels from centered
  std::uint8_t ink_lo = 0, ink_hi = 60;
  std::uint8_t paper_lo = 190, paper_hi = 255;
  Polarity polarity = Polarity::dark_on_light;
};

struct GlyphSetOptions {
  std::size_t per_class = 10;
  std::size_t image_size = 32;
  GlyphJitter jitter;
};

// per_class images of every class, labels correct by construction, splits
// assigned with assign_splits(seed). Throws ConfigError for image_size < 16.
Dataset synth_glyphs(const GlyphFont& font, const GlyphSetOptions& options, std::uint64_t seed);

struct SceneOptions {
  std::size_t scale = 4;
  std::size_t gap_px = 4;   // horizontal space between adjacent glyph cells
  std::size_t margin = 8;   // empty border around the text
  std::size_t width = 0;    // 0: just wide enough for the text
  std::size_t height = 0;   // 0: glyph height plus two margins
  int x_shift = 0;          // moves the whole line right
  Polarity polarity = Polarity::dark_on_light;
  std::uint8_t ink = 40;
  std::uint8_t paper = 215;
  std::size_t channels = 3;
};

struct Scene {
  ImageU8 image;
  std::vector<BoundingBox> boxes;  // tight ink box of each glyph, left to right
  std::string text;                // lowercase
};

// Throws LabelError for non-alphanumeric text and LayoutError when the text
// does not fit the requested width/height.
Scene synth_scene(const GlyphFont& font, std::string_view text, const SceneOptions& options = {});

}  // namespace glyphforge::dataset
