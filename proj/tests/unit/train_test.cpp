// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "aesmpn/nn/init.hpp"
#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/ops.hpp"
#include "aesmpn/numerics/random.hpp"
#include "aesmpn/train/adam.hpp"
#include "aesmpn/train/metrics.hpp"
#include "aesmpn/train/trainer.hpp"
#include "support.hpp"

using namespace aesmpn;
using namespace aesmpn::train;
using numerics::GradMap;
using numerics::ParamStore;
using numerics::Tensor;
using numerics::Var;

namespace {

model::ModelConfig tiny_config(std::size_t depth = 0) {
  model::ModelConfig c;
  c.hidden = 8;
  c.latent = 8;
  c.iterations = 2;
  c.readout_depth = depth;
  c.flow_features = data::kFlowFeatureWidth;
  c.l2_features = data::kLinkFeatureWidth;
  c.l3_features = data::kLinkFeatureWidth;
  return c;
}

std::uint64_t store_hash(const ParamStore& s) {
  std::string bytes;
  for (numerics::ParamId id = 0; id < s.size(); ++id) {
    const auto d = s.value(id).data();
    bytes.append(reinterpret_cast<const char*>(d.data()), d.size_bytes());
  }
  return fnv1a64(bytes);
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("metric examples") {
  const double y1[] = {100}, p1[] = {110};
  CHECK(mape(y1, p1) == doctest::Approx(10.0).epsilon(1e-15));
  const double y2[] = {1, 2}, p2[] = {2, 1};
  CHECK(mape(y2, p2) == 75.0);
  CHECK(mape(y2, y2) == 0.0);
  CHECK(mae(y2, y2) == 0.0);
  CHECK(mse(y2, y2) == 0.0);
  CHECK(msle(y2, y2) == 0.0);
  const double y3[] = {0}, p3[] = {3};
  CHECK(mae(y3, p3) == 3.0);
  CHECK(mse(y3, p3) == 9.0);
  CHECK(msle(y3, p3) == doctest::Approx(std::log(4.0) * std::log(4.0)).epsilon(1e-15));
  CHECK(msle(y3, p3) == doctest::Approx(1.9218).epsilon(1e-4));
  CHECK(mse(y3, p3) == mae(y3, p3) * mae(y3, p3));
}

TEST_CASE("metric contracts") {
  const double zero[] = {0}, one[] = {1};
  CHECK_THROWS_AS(mape(zero, one), ContractError);
  const double two[] = {1, 2};
  CHECK_THROWS_AS(mae(two, one), DimensionError);
  CHECK_THROWS_AS(mse(std::span<const double>{}, std::span<const double>{}), ContractError);
  const double neg[] = {-1.5};
  CHECK_THROWS_AS(msle(neg, one), ContractError);
  const MetricsReport r = compute_metrics("val", two, two);
  CHECK(r.split == "val");
  CHECK(r.mape_pct == 0.0);
}

TEST_CASE("adam first step moves every coordinate by about the learning rate") {
  ParamStore store;
  const auto id = store.add("w", Tensor::vector({0.5, -2.0, 3.0}));
  AdamState state(store);
  GradMap g(store);
  g[id] = Tensor::filled({3}, 1.0);
  const Tensor before = store.value(id);
  adam_step(state, store, g, AdamConfig{});
  CHECK(state.step_count() == 1);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(store.value(id)[i] - before[i] == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-9));
  }
  CHECK(state.first_moment(id)[0] == doctest::Approx(0.1));
  CHECK(state.second_moment(id)[0] == doctest::Approx(0.001));
  adam_step(state, store, g, AdamConfig{});
  CHECK(state.step_count() == 2);
}

TEST_CASE("adam with zero gradients leaves parameters bit-identical") {
  ParamStore store;
  nn::ParamBuilder pb(store, 3);
  pb.weight("w", 4, 5);
  pb.bias("b", 4);
  const ParamStore before = store;
  AdamState state(store);
  GradMap g(store);
  for (int i = 0; i < 5; ++i) adam_step(state, store, g, AdamConfig{});
  CHECK(store == before);
}

TEST_CASE("adam is deterministic and checks shapes") {
  ParamStore a;
  nn::ParamBuilder pb(a, 3);
  pb.weight("w", 3, 3);
  ParamStore b = a;
  AdamState sa(a), sb(b);
  GradMap g(a);
  g[0] = nn::init_params({3, 3}, nn::InitKind::Weight, 9);
  for (int i = 0; i < 4; ++i) {
    adam_step(sa, a, g, AdamConfig{});
    adam_step(sb, b, g, AdamConfig{});
  }
  CHECK(a == b);
  GradMap wrong;
  CHECK_THROWS_AS(adam_step(sa, a, wrong, AdamConfig{}), DimensionError);
  GradMap bad_shape(a);
  bad_shape[0] = Tensor::vector({1, 2});
  CHECK_THROWS_AS(adam_step(sa, a, bad_shape, AdamConfig{}), DimensionError);
}

TEST_CASE("global norm clipping") {
  ParamStore store;
  const auto id = store.add("w", Tensor::vector({3, 4}));
  GradMap g(store);
  g[id] = Tensor::vector({3, 4});
  CHECK(clip_global_norm(g, 10.0) == 5.0);
  CHECK(g[id] == Tensor::vector({3, 4}));
  CHECK(clip_global_norm(g, 1.0) == 5.0);
  CHECK(g.global_norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(clip_global_norm(g, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("train config invariants") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = {};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = {};
  c.ae_pretrain = true;
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("mape loss matches the metric and has the analytic gradient") {
  ParamStore store;
  const auto id = store.add("p", Tensor::vector({1.5, 1.0, 4.0}));
  const double y[] = {1.0, 2.0, 5.0};
  numerics::Graph g(store);
  Var loss = mape_loss(g, g.param(id), y);
  const double p[] = {1.5, 1.0, 4.0};
  CHECK(loss.value().item() == doctest::Approx(mape(y, p)).epsilon(1e-15));
  const GradMap grads = g.backward(loss);
  CHECK(grads[id][0] == doctest::Approx(100.0 / 3.0));
  CHECK(grads[id][1] == doctest::Approx(-100.0 / 6.0));
  CHECK(grads[id][2] == doctest::Approx(-100.0 / 15.0));
  const double zero[] = {0.0, 1.0, 1.0};
  numerics::Graph h(store);
  CHECK_THROWS_AS(mape_loss(h, h.param(id), zero), ContractError);
}

TEST_CASE("training is deterministic and records every epoch") {
  const auto samples = testing::generated_samples(12, 21);
  const std::vector<model::NetworkSample> tr(samples.begin(), samples.begin() + 9);
  const std::vector<model::NetworkSample> va(samples.begin() + 9, samples.end());
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 5;
  std::vector<EpochRecord> seen;
  const auto init = model::ModelParams::create(tiny_config(2), 5);
  const TrainResult a = train::train(init, tr, va, {}, cfg, [&](const EpochRecord& r) { seen.push_back(r); });
  const TrainResult b = train::train(init, tr, va, {}, cfg);
  REQUIRE(a.history.size() == 3);
  CHECK(seen.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.history[i].epoch == i + 1);
    CHECK(std::isfinite(a.history[i].train_mape));
    CHECK(std::isfinite(a.history[i].val_mape));
    CHECK(a.history[i].train_mape == b.history[i].train_mape);
    CHECK(a.history[i].val_mape == b.history[i].val_mape);
  }
  CHECK(a.best.store == b.best.store);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : a.history) best = std::min(best, r.val_mape);
  CHECK(a.history[a.best_epoch - 1].val_mape == best);
  CHECK(evaluate(a.best, va, {}).mape_pct == best);
  CHECK_THROWS_AS(train::train(init, {}, va, {}, cfg), ContractError);
}

TEST_CASE("autoencoder pretraining lowers reconstruction loss") {
  const auto samples = testing::generated_samples(10, 22);
  auto params = model::ModelParams::create(tiny_config(), 3);
  TrainConfig cfg;
  cfg.ae_pretrain = true;
  cfg.ae_pretrain_steps = 150;
  cfg.learning_rate = 0.01;
  const auto losses = pretrain_autoencoders(params, samples, cfg);
  REQUIRE(losses.size() == 150);
  CHECK(losses.back() < 0.5 * losses.front());
}

TEST_CASE("evaluation is read-only and reports seconds") {
  const auto samples = testing::generated_samples(4, 23);
  const auto params = model::ModelParams::create(tiny_config(3), 4);
  const std::uint64_t before = store_hash(params.store);
  const MetricsReport r = evaluate(params, samples, {}, "test");
  CHECK(store_hash(params.store) == before);
  CHECK(r.split == "test");
  CHECK(r.mape_pct >= 0.0);
  CHECK(r.mae >= 0.0);
  CHECK(r.mse >= 0.0);
  CHECK(r.msle >= 0.0);
  const Predictions p = predict_split(params, samples, {});
  std::size_t flows = 0;
  for (const auto& s : samples) flows += s.flows.size();
  CHECK(p.targets.size() == flows);
  CHECK(p.targets.front() == samples.front().flows.front().target * 1e-5);
  const double m = mean_target(samples, {});
  CHECK(evaluate_constant(m, samples, {}).mae > 0.0);
  CHECK_THROWS_AS(evaluate(params, {}, {}), ContractError);
}

TEST_CASE("a perfect predictor scores zero") {
  const auto samples = testing::generated_samples(1, 24);
  const auto& s = samples.front();
  bool same = true;
  for (const auto& f : s.flows) same = same && f.target == s.flows.front().target;
  if (!same) {
    CHECK(evaluate_constant(mean_target(samples, {}), samples, {}).mape_pct > 0.0);
  }
  std::vector<double> y;
  for (const auto& f : s.flows) y.push_back(f.target);
  const MetricsReport r = compute_metrics("x", y, y);
  CHECK(r.mape_pct == 0.0);
  CHECK(r.mae == 0.0);
  CHECK(r.mse == 0.0);
  CHECK(r.msle == 0.0);
}

}  // TEST_SUITE
