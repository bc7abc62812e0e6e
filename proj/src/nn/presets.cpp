#include "glyphforge/nn/presets.hpp"

#include <vector>

namespace glyphforge::nn {

namespace {

using L = LayerSpec;

void conv_relu(std::vector<L>& layers, const std::string& name, std::size_t channels,
               std::size_t kernel = 3) {
  layers.push_back(L::conv(name, channels, kernel, 1, kernel / 2));
  layers.push_back(L::relu(name + "_relu"));
}

void head(std::vector<L>& layers, std::size_t num_classes) {
  layers.push_back(L::flatten("flatten"));
  layers.push_back(L::fc("fc1", kHeadWidth));
  layers.push_back(L::relu("fc1_relu", Stage::classifier));
  layers.push_back(L::fc("fc2", num_classes));
}

// conv16-pool, conv32-pool, conv64-pool.
std::vector<L> vanilla() {
  std::vector<L> l;
  conv_relu(l, "conv1", 16);
  l.push_back(L::maxpool("pool1", 2, 2));
  conv_relu(l, "conv2", 32);
  l.push_back(L::maxpool("pool2", 2, 2));
  conv_relu(l, "conv3", 64);
  l.push_back(L::maxpool("pool3", 2, 2));
  return l;
}

// Five convolutions (a wide 5x5 stem, then 3x3) and an extra fully-connected
// layer inside the feature extractor, giving 5 conv + 3 fc with the shared head.
std::vector<L> mini_alexnet() {
  std::vector<L> l;
  conv_relu(l, "conv1", 16, 5);
  l.push_back(L::maxpool("pool1", 2, 2));
  conv_relu(l, "conv2", 32);
  l.push_back(L::maxpool("pool2", 2, 2));
  conv_relu(l, "conv3", 48);
  conv_relu(l, "conv4", 48);
  conv_relu(l, "conv5", 32);
  l.push_back(L::maxpool("pool3", 2, 2));
  l.push_back(L::flatten("features_flatten"));
  l.push_back(L::fc("fc0", 256, Stage::feature_extractor));
  l.push_back(L::relu("fc0_relu"));
  return l;
}

// Stacks of two 3x3 convolutions per stage.
std::vector<L> mini_vgg() {
  std::vector<L> l;
  conv_relu(l, "conv1_1", 16);
  conv_relu(l, "conv1_2", 16);
  l.push_back(L::maxpool("pool1", 2, 2));
  conv_relu(l, "conv2_1", 32);
  conv_relu(l, "conv2_2", 32);
  l.push_back(L::maxpool("pool2", 2, 2));
  conv_relu(l, "conv3_1", 64);
  conv_relu(l, "conv3_2", 64);
  l.push_back(L::maxpool("pool3", 2, 2));
  return l;
}

void residual_block(std::vector<L>& l, const std::string& name, std::size_t channels,
                    const std::string& skip_from) {
  conv_relu(l, name + "_a", channels);
  l.push_back(L::conv(name + "_b", channels, 3, 1, 1));
  l.push_back(L::residual_add(name + "_add", skip_from));
  l.push_back(L::relu(name + "_relu"));
}

// Stem, then two basic residual blocks with identity skips.
std::vector<L> mini_resnet() {
  std::vector<L> l;
  conv_relu(l, "stem", 16);
  l.push_back(L::maxpool("pool1", 2, 2));
  residual_block(l, "block1", 16, "pool1");
  l.push_back(L::maxpool("pool2", 2, 2));
  conv_relu(l, "widen", 32);
  residual_block(l, "block2", 32, "widen_relu");
  l.push_back(L::maxpool("pool3", 2, 2));
  return l;
}

// One dense block (growth 8) where each layer's output is concatenated with
// everything before it, then a transition convolution.
std::vector<L> mini_densenet() {
  constexpr std::size_t growth = 8;
  std::vector<L> l;
  conv_relu(l, "stem", 16);
  l.push_back(L::maxpool("pool1", 2, 2));
  conv_relu(l, "dense1", growth);
  l.push_back(L::concat("dense1_cat", "pool1"));
  conv_relu(l, "dense2", growth);
  l.push_back(L::concat("dense2_cat", "dense1_cat"));
  conv_relu(l, "dense3", growth);
  l.push_back(L::concat("dense3_cat", "dense2_cat"));
  l.push_back(L::maxpool("pool2", 2, 2));
  conv_relu(l, "transition", 32, 1);
  l.push_back(L::maxpool("pool3", 2, 2));
  return l;
}

}  // namespace

std::optional<Preset> parse_preset(std::string_view name) {
  if (name == "vanilla") return Preset::vanilla;
  if (name == "mini-alexnet") return Preset::mini_alexnet;
  if (name == "mini-vgg") return Preset::mini_vgg;
  if (name == "mini-resnet") return Preset::mini_resnet;
  if (name == "mini-densenet") return Preset::mini_densenet;
  return std::nullopt;
}

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::vanilla: return "vanilla";
    case Preset::mini_alexnet: return "mini-alexnet";
    case Preset::mini_vgg: return "mini-vgg";
    case Preset::mini_resnet: return "mini-resnet";
    case Preset::mini_densenet: return "mini-densenet";
  }
  return "unknown";
}

NetworkSpec preset_spec(Preset preset, InputShape input, std::size_t num_classes) {
  if (num_classes < 2) throw ConfigError("a classifier needs at least 2 classes");
  NetworkSpec spec{input, {}, num_classes};
  switch (preset) {
    case Preset::vanilla: spec.layers = vanilla(); break;
    case Preset::mini_alexnet: spec.layers = mini_alexnet(); break;
    case Preset::mini_vgg: spec.layers = mini_vgg(); break;
    case Preset::mini_resnet: spec.layers = mini_resnet(); break;
    case Preset::mini_densenet: spec.layers = mini_densenet(); break;
  }
  if (preset == Preset::mini_alexnet) {
    // Already flat; the head starts directly at fc1.
    spec.layers.push_back(L::fc("fc1", kHeadWidth));
    spec.layers.push_back(L::relu("fc1_relu", Stage::classifier));
    spec.layers.push_back(L::fc("fc2", num_classes));
  } else {
    head(spec.layers, num_classes);
  }
  return spec;
}

Network build_network(Preset preset, InputShape input, std::size_t num_classes,
                      std::uint64_t seed) {
  Rng rng(seed, /*stream=*/0x1417);
  return Network(preset_spec(preset, input, num_classes), rng);
}

}  // namespace glyphforge::nn
