#include "glyphforge/nn/network.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

namespace glyphforge::nn {

using glyphforge::to_string;

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool2d: return "maxpool2d";
    case LayerKind::relu: return "relu";
    case LayerKind::flatten: return "flatten";
    case LayerKind::fully_connected: return "fully-connected";
    case LayerKind::residual_add: return "residual-add";
    case LayerKind::concat: return "concat";
  }
  return "unknown";
}

LayerSpec LayerSpec::conv(std::string name, std::size_t out_channels, std::size_t kernel,
                          std::size_t stride, std::size_t padding, Stage stage) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.name = std::move(name);
  s.stage = stage;
  s.out_channels = out_channels;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  return s;
}

LayerSpec LayerSpec::maxpool(std::string name, std::size_t window, std::size_t stride,
                             Stage stage) {
  LayerSpec s;
  s.kind = LayerKind::maxpool2d;
  s.name = std::move(name);
  s.stage = stage;
  s.window = window;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::relu(std::string name, Stage stage) {
  LayerSpec s;
  s.kind = LayerKind::relu;
  s.name = std::move(name);
  s.stage = stage;
  return s;
}

LayerSpec LayerSpec::flatten(std::string name, Stage stage) {
  LayerSpec s;
  s.kind = LayerKind::flatten;
  s.name = std::move(name);
  s.stage = stage;
  return s;
}

LayerSpec LayerSpec::fc(std::string name, std::size_t out_features, Stage stage) {
  LayerSpec s;
  s.kind = LayerKind::fully_connected;
  s.name = std::move(name);
  s.stage = stage;
  s.out_features = out_features;
  return s;
}

LayerSpec LayerSpec::residual_add(std::string name, std::string from, Stage stage) {
  LayerSpec s;
  s.kind = LayerKind::residual_add;
  s.name = std::move(name);
  s.stage = stage;
  s.merge_from = std::move(from);
  return s;
}

LayerSpec LayerSpec::concat(std::string name, std::string from, Stage stage) {
  LayerSpec s = residual_add(std::move(name), std::move(from), stage);
  s.kind = LayerKind::concat;
  return s;
}

namespace {

[[noreturn]] void layer_error(const LayerSpec& layer, const std::string& what) {
  throw ShapeError("layer '" + layer.name + "' (" + std::string(to_string(layer.kind)) + "): " + what);
}

Shape layer_output_shape(const LayerSpec& layer, const Shape& in, const Shape* merged) {
  switch (layer.kind) {
    case LayerKind::conv2d: {
      if (in.size() != 3) layer_error(layer, "expects a (C,H,W) input, got " + to_string(in));
      if (layer.out_channels == 0 || layer.kernel == 0) layer_error(layer, "zero channels or kernel");
      return {layer.out_channels, conv_output_size(in[1], layer.kernel, layer.stride, layer.padding),
              conv_output_size(in[2], layer.kernel, layer.stride, layer.padding)};
    }
    case LayerKind::maxpool2d: {
      if (in.size() != 3) layer_error(layer, "expects a (C,H,W) input, got " + to_string(in));
      if (layer.window > in[1] || layer.window > in[2]) {
        layer_error(layer, "window " + std::to_string(layer.window) + " larger than input " +
                               to_string(in));
      }
      return {in[0], conv_output_size(in[1], layer.window, layer.stride, 0),
              conv_output_size(in[2], layer.window, layer.stride, 0)};
    }
    case LayerKind::relu:
      return in;
    case LayerKind::flatten:
      if (in.size() != 3) layer_error(layer, "expects a (C,H,W) input, got " + to_string(in));
      return {in[0] * in[1] * in[2]};
    case LayerKind::fully_connected:
      if (in.size() != 1) layer_error(layer, "expects a flat input, got " + to_string(in));
      if (layer.out_features == 0) layer_error(layer, "zero output features");
      return {layer.out_features};
    case LayerKind::residual_add:
      if (*merged != in) {
        layer_error(layer, "input " + to_string(in) + " differs from '" + layer.merge_from +
                               "' output " + to_string(*merged));
      }
      return in;
    case LayerKind::concat:
      if (in.size() != 3 || merged->size() != 3 || in[1] != (*merged)[1] || in[2] != (*merged)[2]) {
        layer_error(layer, "spatial mismatch between input " + to_string(in) + " and '" +
                               layer.merge_from + "' output " + to_string(*merged));
      }
      return {in[0] + (*merged)[0], in[1], in[2]};
  }
  layer_error(layer, "unknown kind");
}

std::vector<std::size_t> merge_sources(const NetworkSpec& spec) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> sources(spec.layers.size(), 0);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    if (layer.kind == LayerKind::residual_add || layer.kind == LayerKind::concat) {
      auto it = index.find(layer.merge_from);
      if (it == index.end()) layer_error(layer, "merge source '" + layer.merge_from + "' is not an earlier layer");
      sources[i] = it->second;
    }
    index.emplace(layer.name, i);
  }
  return sources;
}

template <typename T>
void accumulate(BasicTensor<T>& into, BasicTensor<T>&& grad) {
  if (into.empty()) {
    into = std::move(grad);
    return;
  }
  auto dst = into.data();
  auto src = grad.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

std::vector<Shape> infer_shapes(const NetworkSpec& spec) {
  if (spec.input.channels == 0 || spec.input.height == 0 || spec.input.width == 0) {
    throw ShapeError("network input shape has a zero dimension");
  }
  if (spec.layers.empty()) throw ShapeError("network has no layers");
  std::set<std::string> names;
  bool seen_classifier = false;
  for (const LayerSpec& layer : spec.layers) {
    if (layer.name.empty()) throw ShapeError("layer with empty name");
    if (!names.insert(layer.name).second) layer_error(layer, "duplicate layer name");
    if (layer.stage == Stage::classifier) {
      seen_classifier = true;
    } else if (seen_classifier) {
      layer_error(layer, "feature-extractor layer after the classifier head");
    }
  }
  const LayerSpec& last = spec.layers.back();
  if (last.kind != LayerKind::fully_connected || last.out_features != spec.num_classes) {
    layer_error(last, "final layer must be fully-connected with " +
                          std::to_string(spec.num_classes) + " outputs");
  }
  const auto sources = merge_sources(spec);
  std::vector<Shape> shapes;
  shapes.reserve(spec.layers.size());
  Shape current{spec.input.channels, spec.input.height, spec.input.width};
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    const bool merges = layer.kind == LayerKind::residual_add || layer.kind == LayerKind::concat;
    try {
      current = layer_output_shape(layer, current, merges ? &shapes[sources[i]] : nullptr);
    } catch (const ShapeError& e) {
      const std::string msg = e.what();
      if (msg.rfind("layer '", 0) == 0) throw;
      layer_error(layer, msg);
    }
    shapes.push_back(current);
  }
  return shapes;
}

template <typename T>
BasicNetwork<T>::BasicNetwork(NetworkSpec spec, Rng& rng)
    : spec_(std::move(spec)),
      shapes_(infer_shapes(spec_)),
      merge_source_(merge_sources(spec_)),
      weight_slot_(spec_.layers.size(), -1),
      trainable_(spec_.layers.size(), true) {
  Shape in{spec_.input.channels, spec_.input.height, spec_.input.width};
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& layer = spec_.layers[i];
    if (layer.parameterized()) {
      Shape w_shape, b_shape;
      std::size_t fan_in = 0;
      if (layer.kind == LayerKind::conv2d) {
        w_shape = {layer.out_channels, in[0], layer.kernel, layer.kernel};
        b_shape = {layer.out_channels};
        fan_in = in[0] * layer.kernel * layer.kernel;
      } else {
        w_shape = {in[0], layer.out_features};
        b_shape = {layer.out_features};
        fan_in = in[0];
      }
      BasicTensor<T> w(w_shape);
      const float std = std::sqrt(2.0f / static_cast<float>(fan_in));
      for (T& v : w.data()) v = static_cast<T>(rng.normal(0.0f, std));
      weight_slot_[i] = static_cast<std::ptrdiff_t>(params_.size());
      params_.push_back({layer.name + ".weight", i, w, BasicTensor<T>(w_shape)});
      params_.push_back({layer.name + ".bias", i, BasicTensor<T>(b_shape), BasicTensor<T>(b_shape)});
    }
    in = shapes_[i];
  }
}

template <typename T>
template <typename U>
BasicNetwork<U> BasicNetwork<T>::cast() const {
  BasicNetwork<U> out;
  out.spec_ = spec_;
  out.shapes_ = shapes_;
  out.merge_source_ = merge_source_;
  out.weight_slot_ = weight_slot_;
  out.trainable_ = trainable_;
  for (const auto& p : params_) {
    out.params_.push_back({p.name, p.layer, p.value.template cast<U>(), p.grad.template cast<U>()});
  }
  return out;
}

template <typename T>
Parameter<T>* BasicNetwork<T>::find(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

template <typename T>
const Parameter<T>* BasicNetwork<T>::find(std::string_view name) const {
  return const_cast<BasicNetwork*>(this)->find(name);
}

template <typename T>
std::size_t BasicNetwork<T>::param_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

template <typename T>
void BasicNetwork<T>::zero_grads() {
  for (auto& p : params_) p.grad.fill(T{0});
}

template <typename T>
BasicTensor<T> BasicNetwork<T>::run_layer(std::size_t i, const BasicTensor<T>& in,
                                          const std::vector<BasicTensor<T>>& outputs, PoolIndices* pool) const {
  const LayerSpec& layer = spec_.layers[i];
  BasicTensor<T> out;
  switch (layer.kind) {
    case LayerKind::conv2d: {
      const auto slot = static_cast<std::size_t>(weight_slot_[i]);
      out = conv2d_forward(in, params_[slot].value, params_[slot + 1].value,
                           ConvGeometry{layer.stride, layer.padding});
      break;
    }
    case LayerKind::maxpool2d: {
      auto r = maxpool2d_forward(in, PoolGeometry{layer.window, layer.stride});
      out = std::move(r.out);
      if (pool) *pool = std::move(r.indices);
      break;
    }
    case LayerKind::relu:
      out = relu_forward(in);
      break;
    case LayerKind::flatten:
      out = flatten_forward(in);
      break;
    case LayerKind::fully_connected: {
      const auto slot = static_cast<std::size_t>(weight_slot_[i]);
      out = fc_forward(in, params_[slot].value, params_[slot + 1].value);
      break;
    }
    case LayerKind::residual_add:
      out = merge_forward(MergeKind::residual_add, in, outputs[merge_source_[i]]);
      break;
    case LayerKind::concat:
      out = merge_forward(MergeKind::concat, in, outputs[merge_source_[i]]);
      break;
  }
  return out;
}

template <typename T>
BasicTensor<T> BasicNetwork<T>::forward_from(std::size_t first, ForwardCache<T>& cache) const {
  const std::size_t n_layers = spec_.layers.size();
  if (cache.outputs.size() != n_layers || first >= n_layers) {
    throw ShapeError("forward_from: cache does not match the network");
  }
  for (std::size_t i = first; i < n_layers; ++i) {
    const BasicTensor<T>& in = i == 0 ? cache.input : cache.outputs[i - 1];
    cache.outputs[i] = run_layer(i, in, cache.outputs, &cache.pools[i]);
  }
  return cache.outputs.back();
}

template <typename T>
BasicTensor<T> BasicNetwork<T>::forward(const BasicTensor<T>& batch, ForwardCache<T>* cache) const {
  const Shape expected{spec_.input.channels, spec_.input.height, spec_.input.width};
  if (batch.rank() != 4 || Shape(batch.shape().begin() + 1, batch.shape().end()) != expected) {
    throw ShapeError("network input " + to_string(batch.shape()) + " does not match (N," +
                     to_string(expected).substr(1));
  }
  const std::size_t n_layers = spec_.layers.size();
  std::vector<BasicTensor<T>> local;
  std::vector<BasicTensor<T>>& outputs = cache ? cache->outputs : local;
  outputs.assign(n_layers, BasicTensor<T>{});
  if (cache) {
    cache->input = batch;
    cache->pools.assign(n_layers, PoolIndices{});
  }
  // Without a cache, intermediates are dropped once nothing downstream needs them.
  std::vector<std::size_t> last_use(n_layers, 0);
  for (std::size_t i = 0; i < n_layers; ++i) {
    last_use[i] = std::max(last_use[i], i + 1);
    const auto kind = spec_.layers[i].kind;
    if (kind == LayerKind::residual_add || kind == LayerKind::concat) {
      last_use[merge_source_[i]] = std::max(last_use[merge_source_[i]], i);
    }
  }
  for (std::size_t i = 0; i < n_layers; ++i) {
    const BasicTensor<T>& in = i == 0 ? batch : outputs[i - 1];
    BasicTensor<T> out = run_layer(i, in, outputs, cache ? &cache->pools[i] : nullptr);
    outputs[i] = std::move(out);
    if (!cache) {
      for (std::size_t j = 0; j < i; ++j) {
        if (last_use[j] <= i) outputs[j] = BasicTensor<T>{};
      }
    }
  }
  return cache ? outputs.back() : std::move(outputs.back());
}

template <typename T>
void BasicNetwork<T>::backward(const ForwardCache<T>& cache, const BasicTensor<T>& d_logits) {
  zero_grads();
  const std::size_t n_layers = spec_.layers.size();
  if (cache.outputs.size() != n_layers || d_logits.shape() != cache.outputs.back().shape()) {
    throw ShapeError("backward: cache or gradient does not match the network");
  }
  std::size_t lowest = n_layers;
  for (std::size_t i = 0; i < n_layers; ++i) {
    if (spec_.layers[i].parameterized() && trainable_[i]) {
      lowest = i;
      break;
    }
  }
  if (lowest == n_layers) return;

  // Gradient w.r.t. output k is needed only if a trainable layer sits at or below k.
  auto needed = [&](std::size_t k) { return k >= lowest; };
  std::vector<BasicTensor<T>> d(n_layers);
  d.back() = d_logits;
  for (std::size_t i = n_layers; i-- > lowest;) {
    if (d[i].empty()) continue;
    const LayerSpec& layer = spec_.layers[i];
    const BasicTensor<T>& in = i == 0 ? cache.input : cache.outputs[i - 1];
    const bool want_input = i > 0 && needed(i - 1);
    BasicTensor<T> d_in;
    switch (layer.kind) {
      case LayerKind::conv2d: {
        const auto slot = static_cast<std::size_t>(weight_slot_[i]);
        auto g = conv2d_backward(in, params_[slot].value, d[i],
                                 ConvGeometry{layer.stride, layer.padding}, want_input);
        if (trainable_[i]) {
          params_[slot].grad = std::move(g.d_weight);
          params_[slot + 1].grad = std::move(g.d_bias);
        }
        d_in = std::move(g.d_input);
        break;
      }
      case LayerKind::fully_connected: {
        const auto slot = static_cast<std::size_t>(weight_slot_[i]);
        auto g = fc_backward(in, params_[slot].value, d[i], want_input);
        if (trainable_[i]) {
          params_[slot].grad = std::move(g.d_weight);
          params_[slot + 1].grad = std::move(g.d_bias);
        }
        d_in = std::move(g.d_input);
        break;
      }
      case LayerKind::maxpool2d:
        if (want_input) d_in = maxpool2d_backward(cache.pools[i], d[i]);
        break;
      case LayerKind::relu:
        if (want_input) d_in = relu_backward(in, d[i]);
        break;
      case LayerKind::flatten:
        if (want_input) d_in = flatten_backward(d[i], in.shape());
        break;
      case LayerKind::residual_add:
      case LayerKind::concat: {
        const auto kind =
            layer.kind == LayerKind::concat ? MergeKind::concat : MergeKind::residual_add;
        const std::size_t src = merge_source_[i];
        auto [da, db] = merge_backward(kind, d[i], in.shape(), cache.outputs[src].shape());
        if (needed(src)) accumulate(d[src], std::move(db));
        if (want_input) d_in = std::move(da);
        break;
      }
    }
    if (want_input) accumulate(d[i - 1], std::move(d_in));
    d[i] = BasicTensor<T>{};
  }
}

template <typename T>
std::pair<BasicTensor<T>, ForwardCache<T>> network_forward(const BasicNetwork<T>& net,
                                                           const BasicTensor<T>& batch) {
  ForwardCache<T> cache;
  BasicTensor<T> logits = net.forward(batch, &cache);
  return {std::move(logits), std::move(cache)};
}

template <typename T>
void network_backward(BasicNetwork<T>& net, const ForwardCache<T>& cache,
                      const BasicTensor<T>& d_logits) {
  net.backward(cache, d_logits);
}

void sgd_step(Network& net, float learning_rate) {
  if (!(learning_rate > 0.0f)) {
    throw ConfigError("learning rate must be positive, got " + std::to_string(learning_rate));
  }
  for (auto& p : net.params()) {
    if (!net.trainable(p.layer)) continue;
    auto w = p.value.data();
    auto g = p.grad.data();
    // One fused multiply-add per element: w + (-lr * g) with a single rounding.
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::fma(-learning_rate, g[i], w[i]);
  }
}

std::size_t freezable_layer_count(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (const auto& layer : spec.layers) {
    if (layer.parameterized() && layer.stage == Stage::feature_extractor) ++n;
  }
  return n;
}

std::optional<Freeze> parse_freeze(std::string_view text) {
  if (text == "all") return Freeze::everything();
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return Freeze::first(n);
}

std::string to_string(const Freeze& freeze) {
  return freeze.all ? "all" : std::to_string(freeze.count);
}

void set_freeze(Network& net, Freeze freeze) {
  const NetworkSpec& spec = net.spec();
  const std::size_t available = freezable_layer_count(spec);
  if (!freeze.all && freeze.count > available) {
    throw ConfigError("cannot freeze " + std::to_string(freeze.count) + " layers; network has " +
                      std::to_string(available) + " freezable layers");
  }
  const std::size_t target = freeze.all ? available : freeze.count;
  std::size_t frozen = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    bool trainable = true;
    if (layer.parameterized() && layer.stage == Stage::feature_extractor && frozen < target) {
      trainable = false;
      ++frozen;
    }
    net.set_trainable(i, trainable);
  }
}

template class BasicNetwork<float>;
template class BasicNetwork<double>;
template BasicNetwork<double> BasicNetwork<float>::cast<double>() const;
template BasicNetwork<float> BasicNetwork<double>::cast<float>() const;
template std::pair<BasicTensor<float>, ForwardCache<float>> network_forward(
    const BasicNetwork<float>&, const BasicTensor<float>&);
template std::pair<BasicTensor<double>, ForwardCache<double>> network_forward(
    const BasicNetwork<double>&, const BasicTensor<double>&);
template void network_backward(BasicNetwork<float>&, const ForwardCache<float>&,
                               const BasicTensor<float>&);
template void network_backward(BasicNetwork<double>&, const ForwardCache<double>&,
                               const BasicTensor<double>&);

}  // namespace glyphforge::nn
