#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glyphforge/augment.hpp"
#include "glyphforge/dataset.hpp"
#include "glyphforge/font.hpp"
#include "glyphforge/nn/layers.hpp"
#include "glyphforge/nn/presets.hpp"

namespace support {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

struct OverfitResult {
  float first_loss = 0.0f;
  float final_loss = 0.0f;
};

// One fixed batch of 8 synthetic glyphs (8 distinct classes) trained for
// `steps` plain SGD steps on the vanilla preset at 32x32.
inline OverfitResult overfit_one_batch(std::size_t steps, float lr, std::uint64_t seed) {
  using namespace glyphforge;
  dataset::GlyphSetOptions opts;
  opts.per_class = 1;
  opts.image_size = 32;
  const dataset::Dataset data = dataset::synth_glyphs(dataset::GlyphFont::standard(), opts, seed);

  augment::AugmentConfig aug;
  aug.image_size = 32;
  aug.channels = 1;
  augment::AugmentPipeline eval(augment::eval_steps(aug), 0);
  Tensor batch({8, 1, 32, 32});
  std::vector<int> targets;
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& s = data.samples[i * 4];
    const Tensor t = eval.apply(s.image);
    std::copy(t.data().begin(), t.data().end(), batch.data().begin() + std::ptrdiff_t(i * t.numel()));
    targets.push_back(s.label);
  }

  nn::Network net = nn::build_network(nn::Preset::vanilla, {1, 32, 32}, 36, seed);
  OverfitResult r;
  for (std::size_t step = 0; step < steps; ++step) {
    nn::ForwardCache<float> cache;
    const Tensor logits = net.forward(batch, &cache);
    const auto loss = nn::cross_entropy_loss(logits, std::span<const int>(targets));
    if (step == 0) r.first_loss = loss.loss;
    r.final_loss = loss.loss;
    net.backward(cache, loss.d_logits);
    nn::sgd_step(net, lr);
  }
  return r;
}

}  // namespace support
