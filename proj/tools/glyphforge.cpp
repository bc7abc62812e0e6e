#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "glyphforge/cli/commands.hpp"
#include "glyphforge/dataset.hpp"

using namespace glyphforge;

namespace {

struct ModelFlags {
  std::string config;
  std::string preset;
  std::size_t image_size = 0;
  std::size_t channels = 0;

  void add(CLI::App* app) {
    app->add_option("--config", config, "Training config describing the model and data");
    app->add_option("--preset", preset, "Network preset (overrides the config)");
    app->add_option("--image-size", image_size, "Input size (overrides the config)");
    app->add_option("--channels", channels, "Input channels, 1 or 3 (overrides the config)");
  }

  cli::TrainConfig resolve() const {
    cli::TrainConfig cfg = config.empty() ? cli::TrainConfig{} : cli::parse_config(config);
    if (!preset.empty()) cli::apply_key(cfg, "preset", preset, {});
    if (image_size) cli::apply_key(cfg, "image_size", std::to_string(image_size), {});
    if (channels) cli::apply_key(cfg, "aug.channels", std::to_string(channels), {});
    return cfg;
  }
};

struct SegmentFlags {
  imgproc::SegmentParams params;
  std::string mode = "inverse";

  void add(CLI::App* app) {
    app->add_option("--limit", params.limit, "Threshold limit");
    app->add_option("--mode", mode, "binary or inverse");
    app->add_option("--blur-k", params.blur_k, "Gaussian kernel size (odd)");
    app->add_option("--se", params.se, "Opening structuring element size");
  }

  imgproc::SegmentParams resolve() {
    auto m = imgproc::parse_threshold_mode(mode);
    if (!m) throw ConfigError("--mode must be 'binary' or 'inverse'");
    params.mode = *m;
    return params;
  }
};

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw Error("cannot write '" + path + "'");
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glyphforge: character recognition training and scene-text recognition"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train a network from a config file");
  std::string train_config;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--config", train_config, "Config file")->required();
  train->add_option("--seed", train_seed, "Seed (overrides GLYPHFORGE_SEED and the config)");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  ModelFlags eval_model;
  std::string eval_checkpoint, eval_data, eval_split = "test";
  std::optional<std::uint64_t> eval_seed;
  eval_model.add(eval);
  eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")->required();
  eval->add_option("--data", eval_data, "Class-directory dataset root (default: the config's source)");
  eval->add_option("--split", eval_split, "train, val or test");
  eval->add_option("--seed", eval_seed, "Split seed");

  auto* segment = app.add_subcommand("segment", "Segment characters in a scene image");
  SegmentFlags seg_flags;
  std::string seg_image, seg_out;
  segment->add_option("--image", seg_image, "Input PGM/PPM")->required();
  segment->add_option("--out", seg_out, "Output directory")->required();
  seg_flags.add(segment);

  auto* recognize = app.add_subcommand("recognize", "Recognize words in a scene image or manifest");
  ModelFlags rec_model;
  SegmentFlags rec_seg;
  std::string rec_input, rec_checkpoint, rec_actual, rec_out;
  rec_model.add(recognize);
  rec_seg.add(recognize);
  recognize->add_option("--input", rec_input, "Image, or CSV manifest of image-path,actual-text")->required();
  recognize->add_option("--checkpoint", rec_checkpoint, "Checkpoint file")->required();
  recognize->add_option("--actual", rec_actual, "Expected text for a single image");
  recognize->add_option("--out", rec_out, "Results CSV (default stdout)");

  auto* ablate = app.add_subcommand("ablate", "Train one model per value of a single grid axis");
  std::string grid_path, ablate_out;
  std::optional<std::uint64_t> ablate_seed;
  ablate->add_option("--grid", grid_path, "Grid config")->required();
  ablate->add_option("--out", ablate_out, "Results CSV (default stdout)");
  ablate->add_option("--seed", ablate_seed, "Seed (overrides GLYPHFORGE_SEED and the config)");

  auto* plot = app.add_subcommand("plot", "Render a metrics CSV as SVG");
  std::string plot_metrics, plot_out;
  plot->add_option("--metrics", plot_metrics, "Metrics CSV")->required();
  plot->add_option("--out", plot_out, "SVG output")->required();

  auto* synth_glyphs = app.add_subcommand("synth-glyphs", "Write a synthetic glyph dataset as class directories");
  std::string sg_out, sg_font = "standard";
  std::size_t sg_per_class = 50, sg_size = 64;
  int sg_offset = 2;
  std::uint64_t sg_seed = 0;
  synth_glyphs->add_option("--out", sg_out, "Output root")->required();
  synth_glyphs->add_option("--per-class", sg_per_class, "Images per class");
  synth_glyphs->add_option("--size", sg_size, "Image side length");
  synth_glyphs->add_option("--max-offset", sg_offset, "Position jitter in pixels");
  synth_glyphs->add_option("--font", sg_font, "standard or slanted");
  synth_glyphs->add_option("--seed", sg_seed, "Seed");

  auto* synth_scenes = app.add_subcommand("synth-scenes", "Write synthetic word scenes and a manifest");
  std::string ss_out, ss_font = "standard";
  std::size_t ss_count = 30, ss_min = 3, ss_max = 8, ss_channels = 3;
  std::uint64_t ss_seed = 0;
  synth_scenes->add_option("--out", ss_out, "Output directory")->required();
  synth_scenes->add_option("--count", ss_count, "Number of scenes");
  synth_scenes->add_option("--min-len", ss_min, "Shortest word");
  synth_scenes->add_option("--max-len", ss_max, "Longest word");
  synth_scenes->add_option("--channels", ss_channels, "1 or 3");
  synth_scenes->add_option("--font", ss_font, "standard or slanted");
  synth_scenes->add_option("--seed", ss_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const auto pick_font = [](const std::string& name) -> const dataset::GlyphFont& {
    if (name == "standard") return dataset::GlyphFont::standard();
    if (name == "slanted") return dataset::GlyphFont::slanted();
    throw ConfigError("--font must be 'standard' or 'slanted'");
  };

  try {
    if (*train) {
      cli::TrainConfig cfg = cli::parse_config(train_config);
      cli::apply_seed_overrides(cfg, train_seed ? &*train_seed : nullptr);
      const auto result = cli::run_training(cfg);
      std::cout << "trained " << result.epochs_run << " epochs; metrics " << cfg.metrics.string()
                << "; checkpoint " << cfg.checkpoint.string() << '\n';
    } else if (*eval) {
      cli::TrainConfig cfg = eval_model.resolve();
      cli::apply_seed_overrides(cfg, eval_seed ? &*eval_seed : nullptr);
      const auto split = dataset::parse_split(eval_split);
      if (!split) throw ConfigError("--split must be train, val or test");
      std::optional<std::filesystem::path> root;
      if (!eval_data.empty()) root = eval_data;
      const auto r = cli::cmd_eval(cfg, eval_checkpoint, root, *split);
      std::cout << "split,count,loss,accuracy\n"
                << dataset::to_string(*split) << ',' << r.count << ',' << cli::format_metric(r.loss) << ','
                << cli::format_metric(r.accuracy) << '\n';
    } else if (*segment) {
      const auto out = cli::cmd_segment(seg_image, seg_flags.resolve(), seg_out);
      std::cout << out.boxes.size() << " boxes written to " << seg_out << '\n';
    } else if (*recognize) {
      const cli::TrainConfig cfg = rec_model.resolve();
      std::ofstream file;
      cli::cmd_recognize(cfg, rec_input, rec_checkpoint, rec_seg.resolve(), rec_actual, open_out(rec_out, file));
    } else if (*ablate) {
      cli::Grid grid = cli::parse_grid(grid_path);
      cli::apply_seed_overrides(grid.base, ablate_seed ? &*ablate_seed : nullptr);
      std::ofstream file;
      cli::cmd_ablate(grid, open_out(ablate_out, file));
    } else if (*plot) {
      cli::cmd_plot(plot_metrics, plot_out);
    } else if (*synth_glyphs) {
      dataset::GlyphSetOptions opts;
      opts.per_class = sg_per_class;
      opts.image_size = sg_size;
      opts.jitter.max_offset = sg_offset;
      const auto data = dataset::synth_glyphs(pick_font(sg_font), opts, sg_seed);
      dataset::write_class_dirs(data, sg_out);
      std::cout << data.samples.size() << " images written to " << sg_out << '\n';
    } else if (*synth_scenes) {
      dataset::SceneOptions opts;
      opts.channels = ss_channels;
      const auto words = cli::random_words(ss_count, ss_min, ss_max, ss_seed);
      cli::write_scene_set(pick_font(ss_font), words, opts, ss_out);
      std::cout << words.size() << " scenes written to " << ss_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "glyphforge: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
