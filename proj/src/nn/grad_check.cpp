#include "glyphforge/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace glyphforge::nn {

namespace {

// True when every relu keeps its on/off pattern and every pool picks the same
// positions as in the reference pass, for layers at or after `first`.
bool same_activation_pattern(const NetworkSpec& spec, std::size_t first, const ForwardCache<double>& ref,
                             const ForwardCache<double>& probe) {
  for (std::size_t i = first; i < spec.layers.size(); ++i) {
    switch (spec.layers[i].kind) {
      case LayerKind::relu: {
        const auto a = ref.outputs[i].data();
        const auto b = probe.outputs[i].data();
        for (std::size_t j = 0; j < a.size(); ++j) {
          if ((a[j] > 0.0) != (b[j] > 0.0)) return false;
        }
        break;
      }
      case LayerKind::maxpool2d:
        if (ref.pools[i].offsets != probe.pools[i].offsets) return false;
        break;
      default:
        break;
    }
  }
  return true;
}

}  // namespace

GradCheckReport grad_check(const Network& net, const Tensor& batch, std::span<const int> targets,
                           double eps) {
  if (!(eps > 0.0)) throw ConfigError("grad_check: eps must be positive");
  BasicNetwork<double> probe = net.cast<double>();
  const BasicTensor<double> input = batch.cast<double>();

  ForwardCache<double> base_cache;
  const auto logits = probe.forward(input, &base_cache);
  const auto base = cross_entropy_loss(logits, targets);
  if (!std::isfinite(base.loss)) throw NumericError("grad_check: non-finite loss");
  probe.backward(base_cache, base.d_logits);

  ForwardCache<double> scratch = base_cache;
  auto loss_from = [&](std::size_t layer) {
    const double loss = cross_entropy_loss(probe.forward_from(layer, scratch), targets).loss;
    if (!std::isfinite(loss)) throw NumericError("grad_check: non-finite loss");
    return loss;
  };

  GradCheckReport report;
  for (auto& p : probe.params()) {
    if (!probe.trainable(p.layer)) continue;
    auto w = p.value.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + eps;
      const double plus = loss_from(p.layer);
      bool smooth = same_activation_pattern(probe.spec(), p.layer, base_cache, scratch);
      w[i] = saved - eps;
      const double minus = loss_from(p.layer);
      smooth = smooth && same_activation_pattern(probe.spec(), p.layer, base_cache, scratch);
      w[i] = saved;
      if (!smooth) {
        ++report.kinks_skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * eps);
      const double analytic = p.grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double err = std::abs(analytic - numeric) / denom;
      ++report.checked;
      if (report.worst.empty() || err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst = p.name + "[" + std::to_string(i) + "]";
      }
    }
    // Restore the cached activations for the next tensor.
    probe.forward_from(p.layer, scratch);
  }
  return report;
}

}  // namespace glyphforge::nn
