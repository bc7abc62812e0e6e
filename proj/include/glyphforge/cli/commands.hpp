#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "glyphforge/cli/config.hpp"
#include "glyphforge/cli/train.hpp"
#include "glyphforge/imgproc.hpp"
#include "glyphforge/pipeline.hpp"

namespace glyphforge::cli {

// Network for the config's preset and input shape with every tensor loaded
// strictly from the checkpoint.
nn::Network load_model(const TrainConfig& cfg, const std::filesystem::path& checkpoint);

// Evaluates a checkpoint on one split. data_root overrides the config's
// dataset source (class directories or the synthetic set).
EvalResult cmd_eval(const TrainConfig& cfg, const std::filesystem::path& checkpoint,
                    const std::optional<std::filesystem::path>& data_root, dataset::Split split);

struct SegmentOutput {
  std::vector<BoundingBox> boxes;
  std::vector<std::filesystem::path> crops;
};

// Writes <out>/boxes.csv (one `x,y,w,h` line per box, left to right) and
// <out>/crop_000.pgm|ppm, ... for every box.
SegmentOutput cmd_segment(const std::filesystem::path& image, const imgproc::SegmentParams& params,
                          const std::filesystem::path& out_dir);

// `image-path,actual-text` lines; an optional "image,actual" header line is
// skipped and relative paths are resolved against the manifest's directory.
std::vector<pipeline::LabeledImage> read_recognition_manifest(const std::filesystem::path& manifest);

// A .csv input is read as a manifest, anything else as a single image whose
// expected text is `actual` (may be empty: no accuracy columns then).
pipeline::SceneSetResult cmd_recognize(const TrainConfig& cfg, const std::filesystem::path& input,
                                       const std::filesystem::path& checkpoint, const imgproc::SegmentParams& params,
                                       const std::string& actual, std::ostream& out);

enum class GridAxis { rotation, scale, effect, preset, freeze };

struct Grid {
  TrainConfig base;
  GridAxis axis = GridAxis::rotation;
  std::vector<std::string> cells;
};

// A training config plus exactly one `grid.<axis> = v1, v2, ...` line.
Grid parse_grid(const std::filesystem::path& path);
Grid parse_grid_text(std::string_view text, const std::filesystem::path& base_dir);

// Effect cells (none, blur, grayscale, blur+grayscale) use probability 0.5
// for every listed effect.
inline constexpr float kAblationEffectProb = 0.5f;
TrainConfig apply_cell(const TrainConfig& base, GridAxis axis, const std::string& cell);

struct AblationRow {
  std::string cell;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
};

// One training run per cell (all with the base seed) over the same dataset.
// Writes `cell,train-acc,val-acc,test-acc` rows to out.
std::vector<AblationRow> cmd_ablate(const Grid& grid, std::ostream& out);

std::vector<MetricsRow> read_metrics_csv(std::istream& in);
// Two panels (accuracy, loss); a polyline per split with per-epoch rows and a
// marker for the final test row.
std::string render_metrics_svg(const std::vector<MetricsRow>& rows);
void cmd_plot(const std::filesystem::path& metrics, const std::filesystem::path& out);

}  // namespace glyphforge::cli

namespace glyphforge::cli {

// count random alphanumeric words of length [min_len, max_len].
std::vector<std::string> random_words(std::size_t count, std::size_t min_len, std::size_t max_len,
                                      std::uint64_t seed);

// Renders each word with synth_scene and writes scene_000.ppm, ... plus
// manifest.csv (`image,actual` header, then `file,word` rows) into out_dir.
std::vector<pipeline::LabeledImage> write_scene_set(const dataset::GlyphFont& font,
                                                    const std::vector<std::string>& words,
                                                    const dataset::SceneOptions& options,
                                                    const std::filesystem::path& out_dir);

}  // namespace glyphforge::cli
