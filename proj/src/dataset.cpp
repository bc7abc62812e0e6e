#include "glyphforge/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "glyphforge/rng.hpp"

namespace glyphforge::dataset {

namespace fs = std::filesystem;

int label_map(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (c >= '0' && c <= '9') return c - '0';
  if (std::isalpha(u) && u < 128) return 10 + (std::tolower(u) - 'a');
  throw LabelError(std::string("'") + c + "' is not an alphanumeric character");
}

char id_to_char(int id) {
  if (id < 0 || id >= static_cast<int>(kNumClasses)) {
    throw LabelError("class id " + std::to_string(id) + " outside [0, 36)");
  }
  return id < 10 ? static_cast<char>('0' + id) : static_cast<char>('a' + (id - 10));
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "unknown";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  return std::nullopt;
}

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split == split) out.push_back(i);
  }
  return out;
}

void assign_splits(Dataset& data, std::uint64_t seed) {
  Rng rng(seed, /*stream=*/0x5B1);
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    by_class.at(static_cast<std::size_t>(data.samples[i].label)).push_back(i);
  }
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    const std::size_t n = members.size();
    const auto n_train = static_cast<std::size_t>(std::lround(0.8 * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(n))));
    for (std::size_t k = 0; k < n; ++k) {
      data.samples[members[k]].split = k < n_train ? Split::train : k < n_train + n_val ? Split::val : Split::test;
    }
  }
}

Dataset load_class_dirs(const fs::path& root, std::uint64_t seed) {
  if (!fs::is_directory(root)) throw DatasetError("dataset root '" + root.string() + "' is not a directory");
  std::vector<std::pair<fs::path, int>> files;
  for (const auto& dir : fs::directory_iterator(root)) {
    if (!dir.is_directory()) continue;
    const std::string name = dir.path().filename().string();
    int label = -1;
    if (name.size() == 1) {
      try {
        label = label_map(name[0]);
      } catch (const LabelError&) {
      }
    }
    if (label < 0) {
      std::cerr << "warning: skipping directory '" << dir.path().string() << "' (not a class name)\n";
      continue;
    }
    for (const auto& f : fs::directory_iterator(dir.path())) {
      if (!f.is_regular_file()) continue;
      const std::string ext = f.path().extension().string();
      if (ext == ".pgm" || ext == ".ppm" || ext == ".PGM" || ext == ".PPM") files.emplace_back(f.path(), label);
    }
  }
  std::sort(files.begin(), files.end());
  Dataset data;
  for (const auto& [path, label] : files) {
    try {
      data.samples.push_back({read_image(path), label, Split::train, path.string()});
    } catch (const Error& e) {
      std::cerr << "warning: skipping '" << path.string() << "': " << e.what() << "\n";
    }
  }
  if (data.samples.empty()) throw DatasetError("no images found under '" + root.string() + "'");
  assign_splits(data, seed);
  return data;
}

void write_manifest(const Dataset& data, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << "path,label,split\n";
  for (const auto& s : data.samples) {
    out << s.path << ',' << id_to_char(s.label) << ',' << to_string(s.split) << '\n';
  }
}

void write_class_dirs(const Dataset& data, const fs::path& root) {
  std::array<std::size_t, kNumClasses> counter{};
  for (const auto& s : data.samples) {
    const fs::path dir = root / std::string(1, id_to_char(s.label));
    fs::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.%s", counter[static_cast<std::size_t>(s.label)]++,
                  s.image.channels() == 1 ? "pgm" : "ppm");
    write_image(dir / name, s.image);
  }
}

ImageU8 render_glyph(const GlyphFont& font, int class_id, std::size_t size, std::size_t scale, int x, int y,
                     std::uint8_t ink, std::uint8_t paper) {
  const Glyph& g = font.glyph(static_cast<std::size_t>(class_id));
  ImageU8 img(size, size, 1, paper);
  for (std::size_t gy = 0; gy < g.height; ++gy) {
    for (std::size_t gx = 0; gx < g.width; ++gx) {
      if (!g.ink(gx, gy)) continue;
      for (std::size_t dy = 0; dy < scale; ++dy) {
        for (std::size_t dx = 0; dx < scale; ++dx) {
          const long px = x + static_cast<long>(gx * scale + dx);
          const long py = y + static_cast<long>(gy * scale + dy);
          if (px >= 0 && py >= 0 && px < static_cast<long>(size) && py < static_cast<long>(size)) {
            img.at(static_cast<std::size_t>(px), static_cast<std::size_t>(py)) = ink;
          }
        }
      }
    }
  }
  return img;
}

std::size_t glyph_scale(const GlyphFont& font, std::size_t image_size) {
  const std::size_t margin = image_size / 16;
  const std::size_t room = image_size - 2 * margin;
  return std::max<std::size_t>(1, std::min(room / font.cell_height(), room / font.cell_width()));
}

Dataset synth_glyphs(const GlyphFont& font, const GlyphSetOptions& options, std::uint64_t seed) {
  if (options.image_size < 16) throw ConfigError("synthetic glyph images must be at least 16 pixels");
  const GlyphJitter& j = options.jitter;
  if (j.ink_lo > j.ink_hi || j.paper_lo > j.paper_hi || j.max_offset < 0) {
    throw ConfigError("invalid glyph jitter ranges");
  }
  Rng rng(seed, /*stream=*/0x6F);
  const std::size_t size = options.image_size;
  const std::size_t scale = glyph_scale(font, size);
  const int gw = static_cast<int>(font.cell_width() * scale), gh = static_cast<int>(font.cell_height() * scale);
  const int cx = (static_cast<int>(size) - gw) / 2, cy = (static_cast<int>(size) - gh) / 2;
  Dataset data;
  for (std::size_t label = 0; label < kNumClasses; ++label) {
    for (std::size_t k = 0; k < options.per_class; ++k) {
      const int x = std::clamp(cx + rng.between(-j.max_offset, j.max_offset), 0, static_cast<int>(size) - gw);
      const int y = std::clamp(cy + rng.between(-j.max_offset, j.max_offset), 0, static_cast<int>(size) - gh);
      auto ink = static_cast<std::uint8_t>(rng.between(j.ink_lo, j.ink_hi));
      auto paper = static_cast<std::uint8_t>(rng.between(j.paper_lo, j.paper_hi));
      if (j.polarity == Polarity::light_on_dark) {
        ink = static_cast<std::uint8_t>(255 - ink);
        paper = static_cast<std::uint8_t>(255 - paper);
      }
      data.samples.push_back(
          {render_glyph(font, static_cast<int>(label), size, scale, x, y, ink, paper), static_cast<int>(label),
           Split::train, {}});
    }
  }
  assign_splits(data, seed);
  return data;
}

Scene synth_scene(const GlyphFont& font, std::string_view text, const SceneOptions& o) {
  Scene scene;
  std::vector<int> labels;
  for (char c : text) {
    labels.push_back(label_map(c));
    scene.text.push_back(id_to_char(labels.back()));
  }
  const std::size_t cw = font.cell_width() * o.scale, ch = font.cell_height() * o.scale;
  const std::size_t n = labels.size();
  const std::size_t line_w = n == 0 ? 0 : n * cw + (n - 1) * o.gap_px;
  const std::size_t width = o.width ? o.width : line_w + 2 * o.margin + static_cast<std::size_t>(std::max(0, o.x_shift));
  const std::size_t height = o.height ? o.height : ch + 2 * o.margin;
  const long start_x = static_cast<long>(o.margin) + o.x_shift;
  if (start_x < 0 || static_cast<std::size_t>(start_x) + line_w > width || (n > 0 && ch > height)) {
    throw LayoutError("text '" + std::string(text) + "' does not fit a " + std::to_string(width) + "x" +
                      std::to_string(height) + " scene");
  }
  std::uint8_t ink = o.ink, paper = o.paper;
  if (o.polarity == Polarity::light_on_dark) std::swap(ink, paper);
  ImageU8 gray(width, height, 1, paper);
  const std::size_t top = (height - ch) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const Glyph& g = font.glyph(static_cast<std::size_t>(labels[i]));
    const std::size_t left = static_cast<std::size_t>(start_x) + i * (cw + o.gap_px);
    std::size_t x0 = g.width, x1 = 0, y0 = g.height, y1 = 0;
    for (std::size_t gy = 0; gy < g.height; ++gy) {
      for (std::size_t gx = 0; gx < g.width; ++gx) {
        if (!g.ink(gx, gy)) continue;
        x0 = std::min(x0, gx), x1 = std::max(x1, gx), y0 = std::min(y0, gy), y1 = std::max(y1, gy);
        for (std::size_t dy = 0; dy < o.scale; ++dy) {
          for (std::size_t dx = 0; dx < o.scale; ++dx) {
            gray.at(left + gx * o.scale + dx, top + gy * o.scale + dy) = ink;
          }
        }
      }
    }
    scene.boxes.push_back({static_cast<int>(left + x0 * o.scale), static_cast<int>(top + y0 * o.scale),
                           static_cast<int>((x1 - x0 + 1) * o.scale), static_cast<int>((y1 - y0 + 1) * o.scale)});
  }
  scene.image = o.channels == 3 ? ImageU8(width, height, 3) : gray;
  if (o.channels == 3) {
    for (std::size_t i = 0; i < gray.pixels().size(); ++i) {
      std::fill_n(scene.image.pixels().begin() + static_cast<std::ptrdiff_t>(3 * i), 3, gray.pixels()[i]);
    }
  }
  return scene;
}

}  // namespace glyphforge::dataset
