#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "glyphforge/augment.hpp"
#include "glyphforge/image.hpp"
#include "glyphforge/imgproc.hpp"
#include "glyphforge/nn/network.hpp"

namespace glyphforge::pipeline {

inline constexpr int kCropPad = 2;

struct CharAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;

  double value() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

// Case-insensitive positional matches over min(len) divided by len(actual).
// Throws MetricError for an empty actual string.
CharAccuracy char_accuracy(std::string_view actual, std::string_view predicted);

struct RecognitionResult {
  std::vector<BoundingBox> boxes;
  std::vector<int> class_ids;
  std::vector<float> confidences;  // softmax probability of the chosen class
  std::string predicted;           // lowercase, one char per box
  std::optional<std::string> actual;
  std::optional<CharAccuracy> accuracy;
};

// Crop of one character ready for classification: the box grown by kCropPad,
// centered on a square canvas filled with the crop's mean border value.
ImageU8 character_crop(const ImageU8& img, const BoundingBox& box);

// Segments, classifies every crop with the deterministic eval transform
// (resize, channel conversion, normalize) and assembles the text left to right.
RecognitionResult recognize_word(const ImageU8& img, const nn::Network& net, const imgproc::SegmentParams& seg,
                                 const augment::AugmentConfig& eval,
                                 std::optional<std::string> actual = std::nullopt);

struct LabeledImage {
  std::string name;
  ImageU8 image;
  std::string actual;
};

struct SceneSetResult {
  std::vector<std::string> names;
  std::vector<RecognitionResult> results;
  CharAccuracy total;  // pooled over every image (micro-average)
};

SceneSetResult evaluate_scene_set(const std::vector<LabeledImage>& items, const nn::Network& net,
                                  const imgproc::SegmentParams& seg, const augment::AugmentConfig& eval);

// CSV "image,actual,predicted,correct,total", one row per image, then a
// "TOTAL" row whose predicted column holds the pooled accuracy in percent
// with two decimals.
void write_results_csv(std::ostream& out, const SceneSetResult& set);

std::string format_percent(double fraction);

}  // namespace glyphforge::pipeline
