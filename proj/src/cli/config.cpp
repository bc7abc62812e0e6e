#include "glyphforge/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace glyphforge::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("cannot parse '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

float parse_float(std::string_view key, std::string_view value) {
  const std::string s(value);
  char* end = nullptr;
  const float v = std::strtof(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ConfigError("cannot parse '" + s + "' for " + std::string(key));
  }
  return v;
}

std::vector<float> parse_float_list(std::string_view key, std::string_view value) {
  std::vector<float> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string_view::npos ? value.npos : comma - start));
    out.push_back(parse_float(key, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void require(bool ok, std::string_view key, const char* rule) {
  if (!ok) throw ConfigError(std::string(key) + " " + rule);
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value) {
  std::filesystem::path p{std::string(value)};
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

void apply_key(TrainConfig& cfg, std::string_view key, std::string_view value, const std::filesystem::path& base_dir) {
  auto& aug = cfg.aug;
  if (key == "batch_size") {
    cfg.batch_size = parse_number<std::size_t>(key, value);
    require(cfg.batch_size >= 1, key, "must be at least 1");
  } else if (key == "epochs") {
    cfg.epochs = parse_number<std::size_t>(key, value);
  } else if (key == "learning_rate") {
    cfg.learning_rate = parse_float(key, value);
    require(cfg.learning_rate > 0.0f, key, "must be positive");
  } else if (key == "image_size" || key == "aug.image_size") {
    aug.image_size = parse_number<std::size_t>(key, value);
    require(aug.image_size >= 8, key, "must be at least 8");
  } else if (key == "preset") {
    auto p = nn::parse_preset(value);
    require(p.has_value(), key, "must be one of vanilla, mini-alexnet, mini-vgg, mini-resnet, mini-densenet");
    cfg.preset = *p;
  } else if (key == "freeze") {
    auto f = nn::parse_freeze(value);
    require(f.has_value(), key, "must be a non-negative integer or 'all'");
    cfg.freeze = *f;
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "data_root") {
    cfg.data_root = resolve(base_dir, value);
  } else if (key == "synth.per_class") {
    cfg.synth_per_class = parse_number<std::size_t>(key, value);
    require(cfg.synth_per_class >= 1, key, "must be at least 1");
  } else if (key == "synth.image_size") {
    cfg.synth_image_size = parse_number<std::size_t>(key, value);
    require(cfg.synth_image_size >= 16, key, "must be at least 16");
  } else if (key == "synth.max_offset") {
    cfg.synth_max_offset = parse_number<int>(key, value);
    require(cfg.synth_max_offset >= 0, key, "must be non-negative");
  } else if (key == "synth.font") {
    require(value == "standard" || value == "slanted", key, "must be 'standard' or 'slanted'");
    cfg.synth_font = std::string(value);
  } else if (key == "init_checkpoint") {
    cfg.init_checkpoint = resolve(base_dir, value);
  } else if (key == "init_mode") {
    require(value == "strict" || value == "feature-extractor-only", key,
            "must be 'strict' or 'feature-extractor-only'");
    cfg.init_mode = value == "strict" ? nn::LoadMode::strict : nn::LoadMode::feature_extractor_only;
  } else if (key == "checkpoint") {
    cfg.checkpoint = resolve(base_dir, value);
  } else if (key == "best_checkpoint") {
    cfg.best_checkpoint = resolve(base_dir, value);
  } else if (key == "metrics") {
    cfg.metrics = resolve(base_dir, value);
  } else if (key == "aug.rotation_degrees") {
    aug.rotation_degrees = parse_float(key, value);
    require(aug.rotation_degrees >= 0.0f, key, "must be non-negative");
  } else if (key == "aug.scale_lo") {
    aug.scale_lo = parse_float(key, value);
    require(aug.scale_lo > 0.0f && aug.scale_lo <= 1.0f, key, "must lie in (0, 1]");
  } else if (key == "aug.scale_hi") {
    aug.scale_hi = parse_float(key, value);
    require(aug.scale_hi > 0.0f && aug.scale_hi <= 1.0f, key, "must lie in (0, 1]");
  } else if (key == "aug.blur_prob") {
    aug.blur_prob = parse_float(key, value);
    require(aug.blur_prob >= 0.0f && aug.blur_prob <= 1.0f, key, "must lie in [0, 1]");
  } else if (key == "aug.grayscale_prob") {
    aug.grayscale_prob = parse_float(key, value);
    require(aug.grayscale_prob >= 0.0f && aug.grayscale_prob <= 1.0f, key, "must lie in [0, 1]");
  } else if (key == "aug.blur_kernel") {
    aug.blur_kernel = parse_number<int>(key, value);
    require(aug.blur_kernel >= 1 && aug.blur_kernel % 2 == 1, key, "must be odd and positive");
  } else if (key == "aug.channels" || key == "image_channels") {
    aug.channels = parse_number<std::size_t>(key, value);
    require(aug.channels == 1 || aug.channels == 3, key, "must be 1 or 3");
  } else if (key == "aug.norm_mean") {
    aug.norm_mean = parse_float_list(key, value);
    require(aug.norm_mean.size() == 1 || aug.norm_mean.size() == 3, key, "needs 1 or 3 values");
  } else if (key == "aug.norm_std") {
    aug.norm_std = parse_float_list(key, value);
    require(aug.norm_std.size() == 1 || aug.norm_std.size() == 3, key, "needs 1 or 3 values");
    for (float s : aug.norm_std) require(s > 0.0f, key, "values must be positive");
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

ParsedConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  ParsedConfig parsed;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (key.starts_with("grid.")) {
      parsed.grid.emplace_back(std::string(key.substr(5)), std::string(value));
      continue;
    }
    try {
      apply_key(parsed.config, key, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  const auto& aug = parsed.config.aug;
  if (aug.scale_lo > aug.scale_hi) throw ConfigError("aug.scale_lo must not exceed aug.scale_hi");
  if (aug.norm_mean.size() != aug.norm_std.size()) {
    throw ConfigError("aug.norm_mean and aug.norm_std must have the same length");
  }
  return parsed;
}

ParsedConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

TrainConfig parse_config(const std::filesystem::path& path) {
  ParsedConfig parsed = parse_config_file(path);
  if (!parsed.grid.empty()) {
    throw ConfigError(path.string() + ": grid." + parsed.grid.front().first + " is only valid for ablate");
  }
  return parsed.config;
}

void apply_seed_overrides(TrainConfig& cfg, const std::uint64_t* cli_seed) {
  if (cli_seed) {
    cfg.seed = *cli_seed;
    return;
  }
  if (const char* env = std::getenv("GLYPHFORGE_SEED"); env && *env) {
    try {
      cfg.seed = parse_number<std::uint64_t>("GLYPHFORGE_SEED", env);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("environment: ") + e.what());
    }
  }
}

}  // namespace glyphforge::cli
