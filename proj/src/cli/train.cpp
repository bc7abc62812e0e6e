#include "glyphforge/cli/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "glyphforge/augment.hpp"
#include "glyphforge/nn/checkpoint.hpp"
#include "glyphforge/nn/layers.hpp"
#include "glyphforge/nn/presets.hpp"
#include "glyphforge/rng.hpp"

namespace glyphforge::cli {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5F1;

Tensor assemble_batch(augment::AugmentPipeline& pipeline, const dataset::Dataset& data,
                      std::span<const std::size_t> ids, std::vector<int>& labels) {
  labels.clear();
  Tensor batch;
  std::size_t per_sample = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& sample = data.samples.at(ids[i]);
    Tensor t = pipeline.apply(sample.image);
    if (i == 0) {
      Shape shape{ids.size()};
      shape.insert(shape.end(), t.shape().begin(), t.shape().end());
      batch = Tensor(shape);
      per_sample = t.numel();
    }
    std::copy(t.data().begin(), t.data().end(), batch.data().begin() + static_cast<std::ptrdiff_t>(i * per_sample));
    labels.push_back(sample.label);
  }
  return batch;
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

}  // namespace

EvalResult evaluate(const nn::Network& net, const dataset::Dataset& data, const std::vector<std::size_t>& indices,
                    const augment::AugmentConfig& aug) {
  if (indices.empty()) throw MetricError("evaluate: split has no samples");
  augment::AugmentPipeline pipeline(augment::eval_steps(aug), 0);
  std::vector<int> labels;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < indices.size(); start += kEvalBatch) {
    const std::size_t n = std::min(kEvalBatch, indices.size() - start);
    const std::span<const std::size_t> ids(indices.data() + start, n);
    const Tensor batch = assemble_batch(pipeline, data, ids, labels);
    const Tensor logits = net.forward(batch);
    const auto ce = nn::cross_entropy_loss(logits, labels);
    loss_sum += static_cast<double>(ce.loss) * static_cast<double>(n);
    const std::size_t k = logits.dim(1);
    for (std::size_t r = 0; r < n; ++r) {
      const std::span<const float> row(logits.data().data() + r * k, k);
      if (argmax(row) == static_cast<std::size_t>(labels[r])) ++correct;
    }
  }
  const double count = static_cast<double>(indices.size());
  return {loss_sum / count, static_cast<double>(correct) / count, indices.size()};
}

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "epoch,split,loss,accuracy\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << dataset::to_string(r.split) << ',' << format_metric(r.loss) << ','
        << format_metric(r.accuracy) << '\n';
  }
}

const MetricsRow* TrainResult::last(dataset::Split split) const {
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (it->split == split) return &*it;
  }
  return nullptr;
}

TrainResult train_model(nn::Network net, const TrainConfig& cfg, const dataset::Dataset& data,
                        const TrainOptions& options) {
  const auto train_ids = data.indices(dataset::Split::train);
  const auto val_ids = data.indices(dataset::Split::val);
  const auto test_ids = data.indices(dataset::Split::test);
  if (train_ids.empty() && cfg.epochs > 0) throw DatasetError("train split is empty");

  augment::AugmentPipeline pipeline(augment::training_steps(cfg.aug), cfg.seed);
  TrainResult result{net, net, {}, 0, std::nullopt, std::nullopt};
  double best_val = -1.0;
  std::vector<int> labels;
  std::vector<std::size_t> order;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order = train_ids;
    Rng shuffle(cfg.seed ^ static_cast<std::uint64_t>(epoch), kShuffleStream);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.below(i)]);
    }
    for (std::size_t start = 0, step = 0; start < order.size(); start += cfg.batch_size, ++step) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      const Tensor batch = assemble_batch(pipeline, data, std::span(order.data() + start, n), labels);
      nn::ForwardCache<float> cache;
      const Tensor logits = net.forward(batch, &cache);
      nn::LossResult<float> ce = [&] {
        try {
          return nn::cross_entropy_loss(logits, labels);
        } catch (const NumericError&) {
          throw NumericError("non-finite logits at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step));
        }
      }();
      if (!std::isfinite(ce.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(step));
      }
      net.backward(cache, ce.d_logits);
      nn::sgd_step(net, cfg.learning_rate);
    }
    result.epochs_run = epoch;

    if (options.evaluate_train) {
      const auto tr = evaluate(net, data, train_ids, cfg.aug);
      result.rows.push_back({epoch, dataset::Split::train, tr.loss, tr.accuracy});
    }
    if (!val_ids.empty()) {
      const auto va = evaluate(net, data, val_ids, cfg.aug);
      result.rows.push_back({epoch, dataset::Split::val, va.loss, va.accuracy});
      if (va.accuracy > best_val) {
        best_val = va.accuracy;
        result.best_epoch = epoch;
        result.best_net = net;
      }
      if (options.stop_at_val_accuracy && va.accuracy >= *options.stop_at_val_accuracy) break;
    }
  }
  if (!result.best_epoch) result.best_net = net;
  if (result.epochs_run > 0 && !test_ids.empty()) {
    result.test = evaluate(net, data, test_ids, cfg.aug);
    result.rows.push_back({result.epochs_run, dataset::Split::test, result.test->loss, result.test->accuracy});
  }
  result.final_net = std::move(net);
  return result;
}

dataset::Dataset load_training_data(const TrainConfig& cfg) {
  if (!cfg.data_root.empty()) return dataset::load_class_dirs(cfg.data_root, cfg.seed);
  const auto& font = cfg.synth_font == "slanted" ? dataset::GlyphFont::slanted() : dataset::GlyphFont::standard();
  dataset::GlyphSetOptions opts;
  opts.per_class = cfg.synth_per_class;
  opts.image_size = cfg.synth_image_size;
  opts.jitter.max_offset = cfg.synth_max_offset;
  return dataset::synth_glyphs(font, opts, cfg.seed);
}

nn::Network make_network(const TrainConfig& cfg) {
  nn::Network net = nn::build_network(cfg.preset, cfg.input_shape(), dataset::kNumClasses, cfg.seed);
  if (!cfg.init_checkpoint.empty()) nn::load_checkpoint(net, cfg.init_checkpoint, cfg.init_mode);
  nn::set_freeze(net, cfg.freeze);
  return net;
}

TrainResult run_training(const TrainConfig& cfg) {
  const dataset::Dataset data = load_training_data(cfg);
  TrainResult result = train_model(make_network(cfg), cfg, data);
  ensure_parent(cfg.metrics);
  std::ofstream out(cfg.metrics);
  if (!out) throw Error("cannot write metrics '" + cfg.metrics.string() + "'");
  write_metrics_csv(out, result.rows);
  if (!out) throw Error("failed writing metrics '" + cfg.metrics.string() + "'");
  ensure_parent(cfg.checkpoint);
  nn::save_checkpoint(result.final_net, cfg.checkpoint);
  if (!cfg.best_checkpoint.empty()) {
    ensure_parent(cfg.best_checkpoint);
    nn::save_checkpoint(result.best_net, cfg.best_checkpoint);
  }
  return result;
}

}  // namespace glyphforge::cli
