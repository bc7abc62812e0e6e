#include "glyphforge/pipeline.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "glyphforge/dataset.hpp"
#include "glyphforge/nn/layers.hpp"

namespace glyphforge::pipeline {

CharAccuracy char_accuracy(std::string_view actual, std::string_view predicted) {
  if (actual.empty()) throw MetricError("character accuracy needs a non-empty reference text");
  CharAccuracy acc{0, actual.size()};
  const std::size_t n = std::min(actual.size(), predicted.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = std::tolower(static_cast<unsigned char>(actual[i]));
    const auto p = std::tolower(static_cast<unsigned char>(predicted[i]));
    if (a == p) ++acc.correct;
  }
  return acc;
}

ImageU8 character_crop(const ImageU8& img, const BoundingBox& box) {
  const ImageU8 piece = imgproc::crop(img, box, kCropPad);
  const ImageU8 gray = imgproc::to_grayscale(piece);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t x = 0; x < gray.width(); ++x) {
    sum += gray.at(x, 0) + gray.at(x, gray.height() - 1);
    count += 2;
  }
  for (std::size_t y = 0; y < gray.height(); ++y) {
    sum += gray.at(0, y) + gray.at(gray.width() - 1, y);
    count += 2;
  }
  const auto fill = static_cast<std::uint8_t>(std::lround(sum / static_cast<double>(count)));
  return imgproc::pad_to_square(piece, fill);
}

RecognitionResult recognize_word(const ImageU8& img, const nn::Network& net, const imgproc::SegmentParams& seg,
                                 const augment::AugmentConfig& eval, std::optional<std::string> actual) {
  RecognitionResult result;
  result.boxes = imgproc::segment_characters(img, seg);
  if (!result.boxes.empty()) {
    augment::AugmentPipeline transform(augment::eval_steps(eval), 0);
    const auto& in = net.spec().input;
    const std::size_t per = in.channels * in.height * in.width;
    Tensor batch({result.boxes.size(), in.channels, in.height, in.width});
    for (std::size_t i = 0; i < result.boxes.size(); ++i) {
      const Tensor t = transform.apply(character_crop(img, result.boxes[i]));
      if (t.numel() != per) throw ShapeError("eval transform output does not match the network input");
      std::copy(t.data().begin(), t.data().end(), batch.data().begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    const Tensor logits = net.forward(batch);
    const std::size_t k = logits.dim(1);
    for (std::size_t i = 0; i < result.boxes.size(); ++i) {
      Tensor row({k}, std::vector<float>(logits.data().begin() + static_cast<std::ptrdiff_t>(i * k),
                                         logits.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * k)));
      const Tensor probs = nn::softmax(row);
      const std::size_t best = argmax(probs);
      result.class_ids.push_back(static_cast<int>(best));
      result.confidences.push_back(probs[best]);
      result.predicted.push_back(dataset::id_to_char(static_cast<int>(best)));
    }
  }
  if (actual) {
    result.accuracy = char_accuracy(*actual, result.predicted);
    result.actual = std::move(actual);
  }
  return result;
}

SceneSetResult evaluate_scene_set(const std::vector<LabeledImage>& items, const nn::Network& net,
                                  const imgproc::SegmentParams& seg, const augment::AugmentConfig& eval) {
  if (items.empty()) throw MetricError("scene set is empty");
  SceneSetResult set;
  for (const auto& item : items) {
    set.names.push_back(item.name);
    set.results.push_back(recognize_word(item.image, net, seg, eval, item.actual));
    set.total.correct += set.results.back().accuracy->correct;
    set.total.total += set.results.back().accuracy->total;
  }
  return set;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

void write_results_csv(std::ostream& out, const SceneSetResult& set) {
  out << "image,actual,predicted,correct,total\n";
  for (std::size_t i = 0; i < set.results.size(); ++i) {
    const auto& r = set.results[i];
    out << set.names[i] << ',' << r.actual.value_or("") << ',' << r.predicted << ',';
    if (r.accuracy) out << r.accuracy->correct << ',' << r.accuracy->total;
    else out << ',';
    out << '\n';
  }
  if (set.total.total > 0) {
    out << "TOTAL,," << format_percent(set.total.value()) << ',' << set.total.correct << ',' << set.total.total
        << '\n';
  }
}

}  // namespace glyphforge::pipeline
