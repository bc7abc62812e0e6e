#include "glyphforge/cli/commands.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "glyphforge/codec.hpp"
#include "glyphforge/nn/checkpoint.hpp"
#include "glyphforge/rng.hpp"

namespace glyphforge::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

}  // namespace

nn::Network load_model(const TrainConfig& cfg, const std::filesystem::path& checkpoint) {
  nn::Network net = nn::build_network(cfg.preset, cfg.input_shape(), dataset::kNumClasses, cfg.seed);
  nn::load_checkpoint(net, checkpoint, nn::LoadMode::strict);
  return net;
}

EvalResult cmd_eval(const TrainConfig& cfg, const std::filesystem::path& checkpoint,
                    const std::optional<std::filesystem::path>& data_root, dataset::Split split) {
  TrainConfig effective = cfg;
  if (data_root) effective.data_root = *data_root;
  const nn::Network net = load_model(effective, checkpoint);
  const dataset::Dataset data = load_training_data(effective);
  const auto ids = data.indices(split);
  if (ids.empty()) throw MetricError("split '" + std::string(dataset::to_string(split)) + "' has no samples");
  return evaluate(net, data, ids, effective.aug);
}

SegmentOutput cmd_segment(const std::filesystem::path& image, const imgproc::SegmentParams& params,
                          const std::filesystem::path& out_dir) {
  const ImageU8 img = dataset::read_image(image);
  SegmentOutput result;
  result.boxes = imgproc::segment_characters(img, params);
  ensure_dir(out_dir);
  std::ofstream csv(out_dir / "boxes.csv");
  if (!csv) throw Error("cannot write '" + (out_dir / "boxes.csv").string() + "'");
  const char* ext = img.channels() == 1 ? ".pgm" : ".ppm";
  for (std::size_t i = 0; i < result.boxes.size(); ++i) {
    const auto& b = result.boxes[i];
    csv << b.x << ',' << b.y << ',' << b.w << ',' << b.h << '\n';
    char name[32];
    std::snprintf(name, sizeof name, "crop_%03zu%s", i, ext);
    const auto path = out_dir / name;
    dataset::write_image(path, pipeline::character_crop(img, b));
    result.crops.push_back(path);
  }
  if (!csv) throw Error("failed writing boxes.csv");
  return result;
}

std::vector<pipeline::LabeledImage> read_recognition_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw FormatError("cannot open manifest '" + manifest.string() + "'");
  std::vector<pipeline::LabeledImage> items;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
      throw FormatError(manifest.string() + ": row " + std::to_string(row) + ": expected 'image-path,actual-text'");
    }
    const std::string name = trim(std::string_view(text).substr(0, comma));
    const std::string actual = trim(std::string_view(text).substr(comma + 1));
    if (row == 1 && (name == "image" || name == "path")) continue;
    if (name.empty() || actual.empty()) {
      throw FormatError(manifest.string() + ": row " + std::to_string(row) + ": empty field");
    }
    std::filesystem::path p{name};
    if (p.is_relative()) p = manifest.parent_path() / p;
    items.push_back({name, dataset::read_image(p), actual});
  }
  if (items.empty()) throw FormatError(manifest.string() + ": manifest has no rows");
  return items;
}

pipeline::SceneSetResult cmd_recognize(const TrainConfig& cfg, const std::filesystem::path& input,
                                       const std::filesystem::path& checkpoint, const imgproc::SegmentParams& params,
                                       const std::string& actual, std::ostream& out) {
  const nn::Network net = load_model(cfg, checkpoint);
  if (input.extension() == ".csv") {
    const auto items = read_recognition_manifest(input);
    auto set = pipeline::evaluate_scene_set(items, net, params, cfg.aug);
    pipeline::write_results_csv(out, set);
    return set;
  }
  const ImageU8 img = dataset::read_image(input);
  const std::string name = input.filename().string();
  if (!actual.empty()) {
    auto set = pipeline::evaluate_scene_set({{name, img, actual}}, net, params, cfg.aug);
    pipeline::write_results_csv(out, set);
    return set;
  }
  pipeline::SceneSetResult set;
  set.names.push_back(name);
  set.results.push_back(pipeline::recognize_word(img, net, params, cfg.aug));
  out << "image,actual,predicted,correct,total\n" << name << ",," << set.results.back().predicted << ",,\n";
  return set;
}

Grid parse_grid_text(std::string_view text, const std::filesystem::path& base_dir) {
  ParsedConfig parsed = parse_config_text(text, base_dir);
  if (parsed.grid.empty()) throw ConfigError("grid: no grid.<axis> line");
  if (parsed.grid.size() > 1) {
    throw ConfigError("grid: exactly one axis allowed, got grid." + parsed.grid[0].first + " and grid." +
                      parsed.grid[1].first);
  }
  Grid grid;
  grid.base = parsed.config;
  const auto& [axis, values] = parsed.grid.front();
  if (axis == "rotation") grid.axis = GridAxis::rotation;
  else if (axis == "scale") grid.axis = GridAxis::scale;
  else if (axis == "effect") grid.axis = GridAxis::effect;
  else if (axis == "preset") grid.axis = GridAxis::preset;
  else if (axis == "freeze") grid.axis = GridAxis::freeze;
  else throw ConfigError("grid: unknown axis '" + axis + "'");
  grid.cells = split_list(values);
  for (const auto& cell : grid.cells) {
    if (cell.empty()) throw ConfigError("grid." + axis + ": empty cell");
    apply_cell(grid.base, grid.axis, cell);
  }
  return grid;
}

Grid parse_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_grid_text(buffer.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

TrainConfig apply_cell(const TrainConfig& base, GridAxis axis, const std::string& cell) {
  TrainConfig cfg = base;
  try {
    switch (axis) {
      case GridAxis::rotation:
        apply_key(cfg, "aug.rotation_degrees", cell, {});
        break;
      case GridAxis::scale: {
        const auto dash = cell.find('-');
        if (dash == std::string::npos) {
          apply_key(cfg, "aug.scale_lo", cell, {});
          apply_key(cfg, "aug.scale_hi", cell, {});
        } else {
          apply_key(cfg, "aug.scale_lo", cell.substr(0, dash), {});
          apply_key(cfg, "aug.scale_hi", cell.substr(dash + 1), {});
        }
        if (cfg.aug.scale_lo > cfg.aug.scale_hi) throw ConfigError("low bound exceeds high bound");
        break;
      }
      case GridAxis::effect:
        if (cell == "none") {
          cfg.aug.blur_prob = 0.0f;
          cfg.aug.grayscale_prob = 0.0f;
        } else if (cell == "blur") {
          cfg.aug.blur_prob = kAblationEffectProb;
          cfg.aug.grayscale_prob = 0.0f;
        } else if (cell == "grayscale") {
          cfg.aug.blur_prob = 0.0f;
          cfg.aug.grayscale_prob = kAblationEffectProb;
        } else if (cell == "blur+grayscale") {
          cfg.aug.blur_prob = kAblationEffectProb;
          cfg.aug.grayscale_prob = kAblationEffectProb;
        } else {
          throw ConfigError("must be none, blur, grayscale or blur+grayscale");
        }
        break;
      case GridAxis::preset:
        apply_key(cfg, "preset", cell, {});
        break;
      case GridAxis::freeze:
        apply_key(cfg, "freeze", cell, {});
        break;
    }
  } catch (const ConfigError& e) {
    throw ConfigError("grid cell '" + cell + "': " + e.what());
  }
  return cfg;
}

std::vector<AblationRow> cmd_ablate(const Grid& grid, std::ostream& out) {
  const dataset::Dataset data = load_training_data(grid.base);
  std::vector<AblationRow> rows;
  out << "cell,train-acc,val-acc,test-acc\n";
  for (const auto& cell : grid.cells) {
    const TrainConfig cfg = apply_cell(grid.base, grid.axis, cell);
    const TrainResult result = train_model(make_network(cfg), cfg, data);
    AblationRow row{cell, 0.0, 0.0, 0.0};
    if (const auto* r = result.last(dataset::Split::train)) row.train_acc = r->accuracy;
    if (const auto* r = result.last(dataset::Split::val)) row.val_acc = r->accuracy;
    if (result.test) row.test_acc = result.test->accuracy;
    out << row.cell << ',' << format_metric(row.train_acc) << ',' << format_metric(row.val_acc) << ','
        << format_metric(row.test_acc) << '\n';
    out.flush();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace glyphforge::cli

namespace glyphforge::cli {

std::vector<std::string> random_words(std::size_t count, std::size_t min_len, std::size_t max_len,
                                      std::uint64_t seed) {
  if (min_len < 1 || min_len > max_len) throw ConfigError("random_words: need 1 <= min_len <= max_len");
  Rng rng(seed, 0x30D);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = min_len + static_cast<std::size_t>(rng.below(max_len - min_len + 1));
    std::string w;
    for (std::size_t j = 0; j < len; ++j) w.push_back(dataset::id_to_char(static_cast<int>(rng.below(dataset::kNumClasses))));
    words.push_back(std::move(w));
  }
  return words;
}

std::vector<pipeline::LabeledImage> write_scene_set(const dataset::GlyphFont& font,
                                                    const std::vector<std::string>& words,
                                                    const dataset::SceneOptions& options,
                                                    const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  std::ofstream manifest(out_dir / "manifest.csv");
  if (!manifest) throw Error("cannot write '" + (out_dir / "manifest.csv").string() + "'");
  manifest << "image,actual\n";
  std::vector<pipeline::LabeledImage> items;
  const char* ext = options.channels == 1 ? ".pgm" : ".ppm";
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto scene = dataset::synth_scene(font, words[i], options);
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03zu%s", i, ext);
    dataset::write_image(out_dir / name, scene.image);
    manifest << name << ',' << scene.text << '\n';
    items.push_back({name, std::move(scene.image), scene.text});
  }
  if (!manifest) throw Error("failed writing manifest.csv");
  return items;
}

}  // namespace glyphforge::cli
