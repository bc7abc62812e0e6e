#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "glyphforge/cli/config.hpp"
#include "glyphforge/dataset.hpp"
#include "glyphforge/nn/network.hpp"

namespace glyphforge::cli {

inline constexpr std::size_t kEvalBatch = 64;

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

// Mean cross-entropy and top-1 accuracy over the given samples using the
// deterministic eval transform. Throws MetricError for an empty index list.
EvalResult evaluate(const nn::Network& net, const dataset::Dataset& data, const std::vector<std::size_t>& indices,
                    const augment::AugmentConfig& aug);

struct MetricsRow {
  std::size_t epoch = 0;
  dataset::Split split = dataset::Split::train;
  double loss = 0.0;
  double accuracy = 0.0;
};

// "epoch,split,loss,accuracy" with 6 significant digits.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
std::string format_metric(double value);

struct TrainOptions {
  // Stop after the first epoch whose val accuracy reaches this value.
  std::optional<double> stop_at_val_accuracy;
  bool evaluate_train = true;
};

struct TrainResult {
  nn::Network final_net;
  nn::Network best_net;  // highest val accuracy (final_net when val is empty)
  std::vector<MetricsRow> rows;
  std::size_t epochs_run = 0;
  std::optional<std::size_t> best_epoch;
  std::optional<EvalResult> test;

  const MetricsRow* last(dataset::Split split) const;
};

// Per epoch: shuffle the train split with the epoch seed, run minibatches
// (the final partial batch included) through forward, cross-entropy,
// backward and SGD, then evaluate train and val. The test split is
// evaluated once at the end. Throws NumericError on a non-finite loss.
TrainResult train_model(nn::Network net, const TrainConfig& cfg, const dataset::Dataset& data,
                        const TrainOptions& options = {});

dataset::Dataset load_training_data(const TrainConfig& cfg);

// build_network for the config's preset and seed, then the init checkpoint
// (if any) and the freeze setting.
nn::Network make_network(const TrainConfig& cfg);

// Full train command: data, network, training, metrics CSV and checkpoints.
TrainResult run_training(const TrainConfig& cfg);

}  // namespace glyphforge::cli
