// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/ops.hpp"
#include "aesmpn/numerics/random.hpp"

namespace aesmpn::train {

using model::ModelParams;
using model::NetworkSample;
using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

void TrainConfig::validate() const {
  if (epochs < 1) throw ContractError("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ContractError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ContractError("adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ContractError("adam eps must be positive");
  if (!(clip_norm >= 0.0)) throw ContractError("clip norm must be non-negative");
  if (ae_pretrain && ae_pretrain_steps == 0) throw ContractError("ae pretraining needs at least one step");
}

Var mape_loss(Graph& g, Var preds, std::span<const double> targets) {
  if (preds.value().size() != targets.size()) {
    throw DimensionError("mape_loss: " + std::to_string(preds.value().size()) + " predictions for " +
                         std::to_string(targets.size()) + " targets");
  }
  std::vector<double> inv(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] == 0.0) throw ContractError("mape_loss with a zero target");
    inv[i] = 100.0 / (std::fabs(targets[i]) * static_cast<double>(targets.size()));
  }
  const Var y = g.constant(Tensor(preds.shape(), std::vector<double>(targets.begin(), targets.end())));
  const Var w = g.constant(Tensor(preds.shape(), std::move(inv)));
  return numerics::reduce_sum(numerics::mul(numerics::abs_op(numerics::sub(preds, y)), w));
}

namespace {

std::vector<double> targets_of(const NetworkSample& s) {
  std::vector<double> t;
  t.reserve(s.flows.size());
  for (const auto& f : s.flows) t.push_back(f.target);
  return t;
}

void apply_step(ModelParams& params, AdamState& adam, numerics::GradMap& grads, const TrainConfig& config) {
  if (config.clip_norm > 0.0) clip_global_norm(grads, config.clip_norm);
  adam.step(params.store, grads, config.adam());
}

}  // namespace

std::vector<double> pretrain_autoencoders(ModelParams& params, const std::vector<NetworkSample>& samples,
                                          const TrainConfig& config) {
  std::vector<Tensor> flows, l2, l3;
  for (const auto& s : samples) {
    for (const auto& f : s.flows) flows.push_back(Tensor::vector(f.features));
    for (const auto& x : s.l2_features) l2.push_back(Tensor::vector(x));
    for (const auto& x : s.l3_features) l3.push_back(Tensor::vector(x));
  }
  if (flows.empty()) throw ContractError("ae pretraining on an empty split");
  AdamState adam(params.store);
  std::vector<double> losses;
  losses.reserve(config.ae_pretrain_steps);
  for (std::size_t step = 0; step < config.ae_pretrain_steps; ++step) {
    Graph g(params.store);
    Var loss = nn::ae_loss(g, params.ae_f, flows);
    if (!l2.empty()) loss = numerics::add(loss, nn::ae_loss(g, params.ae_l2, l2));
    if (!l3.empty()) loss = numerics::add(loss, nn::ae_loss(g, params.ae_l3, l3));
    losses.push_back(loss.value().item());
    numerics::GradMap grads = g.backward(loss);
    apply_step(params, adam, grads, config);
  }
  return losses;
}

TrainResult train(ModelParams params, const std::vector<NetworkSample>& train_split,
                  const std::vector<NetworkSample>& val_split, const data::NormalizationSpec& spec,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_split.empty()) throw ContractError("training split is empty");
  for (const auto& s : train_split) model::check_sample(s);

  TrainResult result;
  if (config.ae_pretrain) result.ae_pretrain_losses = pretrain_autoencoders(params, train_split, config);

  std::vector<model::SamplePlan> plans;
  std::vector<std::vector<double>> targets;
  plans.reserve(train_split.size());
  for (const auto& s : train_split) {
    plans.emplace_back(s);
    targets.push_back(targets_of(s));
  }

  AdamState adam(params.store);
  std::vector<std::size_t> order(train_split.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = make_rng(config.seed, "shuffle", epoch);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      try {
        Graph g(params.store);
        const Var preds = model::forward(g, params, train_split[i]);
        const Var loss = mape_loss(g, preds, targets[i]);
        numerics::GradMap grads = g.backward(loss);
        if (!grads.all_finite()) throw NumericError("non-finite gradient");
        apply_step(params, adam, grads, config);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", sample " + std::to_string(i) +
                           ": " + e.what());
      }
    }
    EpochRecord rec{epoch, evaluate(params, train_split, spec, "train").mape_pct, 0.0};
    rec.val_mape = val_split.empty() ? rec.train_mape : evaluate(params, val_split, spec, "val").mape_pct;
    if (!std::isfinite(rec.train_mape) || !std::isfinite(rec.val_mape)) {
      throw NumericError("non-finite MAPE after epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);
    if (rec.val_mape < best) {
      best = rec.val_mape;
      result.best_epoch = epoch;
      result.best = params;
    }
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

Predictions predict_split(const ModelParams& params, const std::vector<NetworkSample>& split,
                          const data::NormalizationSpec& spec) {
  Predictions out;
  for (const auto& s : split) {
    const std::vector<double> p = model::predict(params, s);
    for (std::size_t f = 0; f < s.flows.size(); ++f) {
      out.targets.push_back(data::denormalize_delay(s.flows[f].target, spec));
      out.preds.push_back(data::denormalize_delay(p[f], spec));
    }
  }
  return out;
}

MetricsReport evaluate(const ModelParams& params, const std::vector<NetworkSample>& split,
                       const data::NormalizationSpec& spec, std::string split_name) {
  if (split.empty()) throw ContractError("evaluate on an empty split");
  const Predictions p = predict_split(params, split, spec);
  return compute_metrics(std::move(split_name), p.targets, p.preds);
}

double mean_target(const std::vector<NetworkSample>& split, const data::NormalizationSpec& spec) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : split) {
    for (const auto& f : s.flows) {
      sum += data::denormalize_delay(f.target, spec);
      ++n;
    }
  }
  if (n == 0) throw ContractError("mean_target of an empty split");
  return sum / static_cast<double>(n);
}

MetricsReport evaluate_constant(double value, const std::vector<NetworkSample>& split,
                                const data::NormalizationSpec& spec, std::string split_name) {
  std::vector<double> targets;
  for (const auto& s : split) {
    for (const auto& f : s.flows) targets.push_back(data::denormalize_delay(f.target, spec));
  }
  const std::vector<double> preds(targets.size(), value);
  return compute_metrics(std::move(split_name), targets, preds);
}

}  // namespace aesmpn::train
