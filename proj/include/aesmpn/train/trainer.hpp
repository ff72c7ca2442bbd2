// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aesmpn/data/normalize.hpp"
#include "aesmpn/model/model.hpp"
#include "aesmpn/train/adam.hpp"
#include "aesmpn/train/metrics.hpp"

namespace aesmpn::train {

struct TrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 42;
  bool ae_pretrain = false;
  std::size_t ae_pretrain_steps = 0;
  double clip_norm = 5.0;  // global gradient norm; 0 disables clipping
  std::size_t readout_depth = 0;

  void validate() const;
  AdamConfig adam() const { return AdamConfig{learning_rate, beta1, beta2, eps}; }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mape = 0.0;
  double val_mape = 0.0;
};

struct TrainResult {
  model::ModelParams best;   // parameters with the lowest validation MAPE
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
  std::vector<double> ae_pretrain_losses;  // reconstruction loss per pretraining step
};

/// MAPE in percent over the flows of one sample, as a differentiable scalar.
numerics::Var mape_loss(numerics::Graph& g, numerics::Var preds, std::span<const double> targets);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Per-sample Adam steps on the MAPE loss. Train and validation MAPE are
/// recomputed with evaluate() after every epoch. An empty validation split
/// selects by training MAPE.
TrainResult train(model::ModelParams params, const std::vector<model::NetworkSample>& train_split,
                  const std::vector<model::NetworkSample>& val_split, const data::NormalizationSpec& spec,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Reconstruction pretraining of the three autoencoders on the entity
/// features of a split. Returns the summed loss per step.
std::vector<double> pretrain_autoencoders(model::ModelParams& params,
                                          const std::vector<model::NetworkSample>& samples,
                                          const TrainConfig& config);

/// Flattened per-flow targets and predictions of a split, in seconds.
struct Predictions {
  std::vector<double> targets;
  std::vector<double> preds;
};
Predictions predict_split(const model::ModelParams& params, const std::vector<model::NetworkSample>& split,
                          const data::NormalizationSpec& spec);

MetricsReport evaluate(const model::ModelParams& params, const std::vector<model::NetworkSample>& split,
                       const data::NormalizationSpec& spec, std::string split_name = "eval");

/// Mean per-flow delay of a split, in seconds.
double mean_target(const std::vector<model::NetworkSample>& split, const data::NormalizationSpec& spec);

/// Metrics of the constant predictor `value` (seconds) on a split.
MetricsReport evaluate_constant(double value, const std::vector<model::NetworkSample>& split,
                                const data::NormalizationSpec& spec, std::string split_name = "eval");

}  // namespace aesmpn::train
