#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glyphforge/nn/layers.hpp"
#include "glyphforge/rng.hpp"
#include "glyphforge/tensor.hpp"

namespace glyphforge::nn {

enum class LayerKind { conv2d, maxpool2d, relu, flatten, fully_connected, residual_add, concat };
enum class Stage { feature_extractor, classifier };

std::string_view to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::string name;
  Stage stage = Stage::feature_extractor;
  std::size_t out_channels = 0;  // conv2d
  std::size_t kernel = 0;        // conv2d
  std::size_t stride = 1;        // conv2d, maxpool2d
  std::size_t padding = 0;       // conv2d
  std::size_t window = 0;        // maxpool2d
  std::size_t out_features = 0;  // fully_connected
  std::string merge_from;        // residual_add, concat: name of an earlier layer

  bool parameterized() const {
    return kind == LayerKind::conv2d || kind == LayerKind::fully_connected;
  }

  static LayerSpec conv(std::string name, std::size_t out_channels, std::size_t kernel,
                        std::size_t stride = 1, std::size_t padding = 0,
                        Stage stage = Stage::feature_extractor);
  static LayerSpec maxpool(std::string name, std::size_t window, std::size_t stride,
                           Stage stage = Stage::feature_extractor);
  static LayerSpec relu(std::string name, Stage stage = Stage::feature_extractor);
  static LayerSpec flatten(std::string name, Stage stage = Stage::feature_extractor);
  static LayerSpec fc(std::string name, std::size_t out_features, Stage stage = Stage::classifier);
  static LayerSpec residual_add(std::string name, std::string from,
                                Stage stage = Stage::feature_extractor);
  static LayerSpec concat(std::string name, std::string from,
                          Stage stage = Stage::feature_extractor);
};

struct InputShape {
  std::size_t channels = 3;
  std::size_t height = 128;
  std::size_t width = 128;

  friend bool operator==(const InputShape&, const InputShape&) = default;
};

struct NetworkSpec {
  InputShape input;
  std::vector<LayerSpec> layers;
  std::size_t num_classes = 0;
};

// Checks every structural invariant and propagates shapes through the layer
// list. Returns each layer's per-sample output shape (batch dim omitted).
// Failures raise ShapeError naming the offending layer.
std::vector<Shape> infer_shapes(const NetworkSpec& spec);

template <typename T>
struct Parameter {
  std::string name;  // "<layer>.weight" or "<layer>.bias"
  std::size_t layer = 0;
  BasicTensor<T> value;
  BasicTensor<T> grad;
};

template <typename T>
struct ForwardCache {
  BasicTensor<T> input;
  std::vector<BasicTensor<T>> outputs;  // one per layer
  std::vector<PoolIndices> pools;       // one per layer, used by maxpool layers only
};

// Instantiated network: spec plus weights, gradients and per-layer trainable
// flags. Training mutates params and grads and is single-writer; forward()
// on a const network can run concurrently.
template <typename T>
class BasicNetwork {
 public:
  // He-normal weights (std = sqrt(2 / fan_in)) drawn in layer order, zero biases.
  BasicNetwork(NetworkSpec spec, Rng& rng);

  template <typename U>
  BasicNetwork<U> cast() const;

  const NetworkSpec& spec() const noexcept { return spec_; }
  const std::vector<Shape>& layer_shapes() const noexcept { return shapes_; }

  std::span<Parameter<T>> params() noexcept { return params_; }
  std::span<const Parameter<T>> params() const noexcept { return params_; }
  Parameter<T>* find(std::string_view name);
  const Parameter<T>* find(std::string_view name) const;
  std::size_t param_count() const;

  bool trainable(std::size_t layer) const { return trainable_.at(layer); }
  void set_trainable(std::size_t layer, bool on) { trainable_.at(layer) = on; }

  // Logits [N, K]. When cache is given it receives every intermediate output.
  BasicTensor<T> forward(const BasicTensor<T>& batch, ForwardCache<T>* cache = nullptr) const;

  // Recomputes layers [first, end) from a full cache, reusing the cached
  // outputs of earlier layers. Used after changing parameters of layer `first`.
  BasicTensor<T> forward_from(std::size_t first, ForwardCache<T>& cache) const;

  // Fills grads for trainable layers and zeroes the rest. Nothing below the
  // lowest trainable layer is visited.
  void backward(const ForwardCache<T>& cache, const BasicTensor<T>& d_logits);

  void zero_grads();

 private:
  template <typename U>
  friend class BasicNetwork;

  BasicNetwork() = default;

  BasicTensor<T> run_layer(std::size_t i, const BasicTensor<T>& in, const std::vector<BasicTensor<T>>& outputs,
                           PoolIndices* pool) const;

  NetworkSpec spec_;
  std::vector<Shape> shapes_;
  std::vector<std::size_t> merge_source_;  // per layer; only meaningful for merge layers
  std::vector<std::ptrdiff_t> weight_slot_;  // per layer index into params_, or -1
  std::vector<Parameter<T>> params_;
  std::vector<bool> trainable_;
};

using Network = BasicNetwork<float>;

template <typename T>
std::pair<BasicTensor<T>, ForwardCache<T>> network_forward(const BasicNetwork<T>& net,
                                                           const BasicTensor<T>& batch);

template <typename T>
void network_backward(BasicNetwork<T>& net, const ForwardCache<T>& cache,
                      const BasicTensor<T>& d_logits);

// W <- W - lr * dW for every trainable layer. Frozen layers are not touched.
void sgd_step(Network& net, float learning_rate);

// Number of feature-extractor layers that own parameters, counted from the input.
std::size_t freezable_layer_count(const NetworkSpec& spec);

struct Freeze {
  bool all = false;
  std::size_t count = 0;

  static Freeze none() { return {}; }
  static Freeze everything() { return {true, 0}; }
  static Freeze first(std::size_t n) { return {false, n}; }
};

std::optional<Freeze> parse_freeze(std::string_view text);
std::string to_string(const Freeze& freeze);

// Marks the first n parameterized feature-extractor layers non-trainable and
// everything else trainable. The classifier head is never frozen.
void set_freeze(Network& net, Freeze freeze);

}  // namespace glyphforge::nn
