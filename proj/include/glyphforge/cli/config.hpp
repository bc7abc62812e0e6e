#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glyphforge/augment.hpp"
#include "glyphforge/nn/checkpoint.hpp"
#include "glyphforge/nn/network.hpp"
#include "glyphforge/nn/presets.hpp"

namespace glyphforge::cli {

// Training run settings. Defaults: batch 64, 100 epochs, learning rate 0.01,
// 128x128 inputs.
struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  float learning_rate = 0.01f;
  nn::Preset preset = nn::Preset::vanilla;
  nn::Freeze freeze;
  std::uint64_t seed = 0;
  augment::AugmentConfig aug;

  // Class-directory dataset; when empty a synthetic glyph set is generated.
  std::filesystem::path data_root;
  std::size_t synth_per_class = 50;
  std::size_t synth_image_size = 64;
  int synth_max_offset = 2;
  std::string synth_font = "standard";

  std::filesystem::path init_checkpoint;
  nn::LoadMode init_mode = nn::LoadMode::feature_extractor_only;

  std::filesystem::path checkpoint = "model.ckpt";
  std::filesystem::path best_checkpoint = "model.best.ckpt";
  std::filesystem::path metrics = "metrics.csv";

  nn::InputShape input_shape() const { return {aug.channels, aug.image_size, aug.image_size}; }
};

// `key = value` lines, `#` comments, blank lines ignored. Relative paths are
// resolved against base_dir. Unknown keys and bad values raise ConfigError
// with the line number. Keys starting with "grid." are collected in `grid`.
struct ParsedConfig {
  TrainConfig config;
  std::vector<std::pair<std::string, std::string>> grid;
};

ParsedConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir);
ParsedConfig parse_config_file(const std::filesystem::path& path);

// Training config from a file; grid keys are rejected.
TrainConfig parse_config(const std::filesystem::path& path);

void apply_key(TrainConfig& cfg, std::string_view key, std::string_view value, const std::filesystem::path& base_dir);

// Seed precedence: explicit override, then GLYPHFORGE_SEED, then the file.
void apply_seed_overrides(TrainConfig& cfg, const std::uint64_t* cli_seed);

}  // namespace glyphforge::cli
