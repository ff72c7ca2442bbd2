// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/cli/gradcheck_suite.hpp"

#include <array>
#include <random>

#include "aesmpn/model/model.hpp"
#include "aesmpn/nn/init.hpp"
#include "aesmpn/nn/layers.hpp"
#include "aesmpn/numerics/grad_check.hpp"
#include "aesmpn/numerics/ops.hpp"
#include "aesmpn/numerics/random.hpp"
#include "aesmpn/train/trainer.hpp"

namespace aesmpn::cli {
namespace {

using namespace numerics;

Tensor uniform(const Shape& shape, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

// Random linear functional of `out`, so every output element carries a
// distinct nonzero weight into the scalar loss.
Var probe(Graph& g, Var out, std::uint64_t salt) {
  auto rng = make_rng(salt, "probe");
  return reduce_sum(mul(out, g.constant(uniform(out.shape(), rng))));
}

class Suite {
 public:
  explicit Suite(const GradSuiteOptions& options) : options_(options) {}

  std::mt19937_64 rng(const std::string& name) const { return make_rng(options_.seed, name); }

  // Registers a [-2, 2] input tensor as a parameter so grad_check perturbs it.
  ParamId input(ParamStore& store, const std::string& name, const Shape& shape, std::mt19937_64& rng) const {
    return store.add(name, uniform(shape, rng));
  }

  void check(const std::string& group, const std::string& name, ParamStore& store, const LossBuilder& build) {
    const bool model = group == "model";
    const double eps = model ? options_.e2e_eps : options_.eps;
    const GradCheckResult r = grad_check(build, store, eps);
    entries_.push_back(GradCheckEntry{group, name, eps, model ? options_.e2e_tolerance : options_.tolerance,
                                      r.max_rel_error, r.coordinates, r.worst});
  }

  std::vector<GradCheckEntry> take() { return std::move(entries_); }

 private:
  const GradSuiteOptions& options_;
  std::vector<GradCheckEntry> entries_;
};

void op_checks(Suite& s) {
  const std::uint64_t salt = 17;
  auto unary = [&](const std::string& name, Var (*op)(Var)) {
    auto rng = s.rng(name);
    ParamStore store;
    const ParamId x = s.input(store, "x", {3, 4}, rng);
    s.check("op", name, store, [=](Graph& g) { return probe(g, op(g.param(x)), salt); });
  };
  auto binary = [&](const std::string& name, Var (*op)(Var, Var), const Shape& rhs) {
    auto rng = s.rng(name);
    ParamStore store;
    const ParamId a = s.input(store, "a", {3, 4}, rng);
    const ParamId b = s.input(store, "b", rhs, rng);
    s.check("op", name, store, [=](Graph& g) { return probe(g, op(g.param(a), g.param(b)), salt); });
  };

  {
    auto rng = s.rng("matmul");
    ParamStore store;
    const ParamId a = s.input(store, "a", {3, 4}, rng);
    const ParamId b = s.input(store, "b", {4, 5}, rng);
    s.check("op", "matmul", store, [=](Graph& g) { return probe(g, matmul(g.param(a), g.param(b)), salt); });
  }
  {
    auto rng = s.rng("matmul_nt");
    ParamStore store;
    const ParamId a = s.input(store, "a", {3, 4}, rng);
    const ParamId b = s.input(store, "b", {5, 4}, rng);
    s.check("op", "matmul_nt", store, [=](Graph& g) { return probe(g, matmul_nt(g.param(a), g.param(b)), salt); });
  }
  unary("transpose", transpose);
  binary("add", add, {3, 4});
  binary("add_bias", add, {4});
  binary("sub", sub, {3, 4});
  binary("sub_bias", sub, {4});
  binary("mul", mul, {3, 4});
  binary("mul_bias", mul, {4});
  {
    auto rng = s.rng("scale");
    ParamStore store;
    const ParamId x = s.input(store, "x", {3, 4}, rng);
    s.check("op", "scale", store, [=](Graph& g) { return probe(g, scale(g.param(x), -1.75), salt); });
  }
  unary("sigmoid", sigmoid);
  unary("tanh", tanh_op);
  unary("selu", selu);
  unary("abs", abs_op);
  for (std::size_t axis : {0u, 1u}) {
    const std::string name = "concat_axis" + std::to_string(axis);
    auto rng = s.rng(name);
    ParamStore store;
    const ParamId a = s.input(store, "a", {2, 3}, rng);
    const ParamId b = s.input(store, "b", axis == 0 ? Shape{3, 3} : Shape{2, 4}, rng);
    s.check("op", name, store,
            [=](Graph& g) { return probe(g, concat({g.param(a), g.param(b)}, axis), salt); });
  }
  {
    auto rng = s.rng("reduce");
    ParamStore store;
    const ParamId x = s.input(store, "x", {3, 4}, rng);
    s.check("op", "reduce_sum", store, [=](Graph& g) { return probe(g, reduce_sum(g.param(x)), salt); });
    s.check("op", "reduce_mean", store, [=](Graph& g) { return probe(g, reduce_mean(g.param(x)), salt); });
    for (std::size_t axis : {0u, 1u}) {
      s.check("op", "reduce_sum_axis" + std::to_string(axis), store,
              [=](Graph& g) { return probe(g, reduce_sum(g.param(x), axis), salt); });
      s.check("op", "reduce_mean_axis" + std::to_string(axis), store,
              [=](Graph& g) { return probe(g, reduce_mean(g.param(x), axis), salt); });
    }
    s.check("op", "reshape", store, [=](Graph& g) { return probe(g, reshape(g.param(x), {2, 6}), salt); });
  }
  {
    auto rng = s.rng("rows");
    ParamStore store;
    const ParamId x = s.input(store, "x", {4, 3}, rng);
    const ParamId r = s.input(store, "r", {2, 3}, rng);
    static constexpr std::array<std::size_t, 5> gather{2, 0, 2, 3, 1};
    static constexpr std::array<std::size_t, 2> scatter{3, 1};
    static constexpr std::array<std::size_t, 4> segment{1, 0, 1, 1};
    s.check("op", "gather_rows", store, [=](Graph& g) { return probe(g, gather_rows(g.param(x), gather), salt); });
    s.check("op", "scatter_rows", store,
            [=](Graph& g) { return probe(g, scatter_rows(g.param(x), scatter, g.param(r)), salt); });
    s.check("op", "segment_sum", store,
            [=](Graph& g) { return probe(g, segment_sum(g.param(x), segment, 3), salt); });
  }
}

// Layer weights from the regular initializer; biases are randomized so the
// bias paths carry non-trivial gradients.
void randomize_biases(ParamStore& store, std::mt19937_64& rng) {
  for (ParamId id = 0; id < store.size(); ++id) {
    if (store.value(id).rank() == 1) store.value(id) = uniform(store.value(id).shape(), rng, -0.5, 0.5);
  }
}

void layer_checks(Suite& s, std::uint64_t seed) {
  const std::uint64_t salt = 23;
  {
    auto rng = s.rng("linear");
    ParamStore store;
    nn::ParamBuilder builder(store, seed);
    const nn::LinearLayer layer = nn::LinearLayer::create(builder, "lin", 4, 3);
    randomize_biases(store, rng);
    const ParamId x = s.input(store, "x", {5, 4}, rng);
    s.check("layer", "linear", store, [=](Graph& g) { return probe(g, layer.forward(g, g.param(x)), salt); });
  }
  {
    auto rng = s.rng("autoencoder");
    ParamStore store;
    nn::ParamBuilder builder(store, seed);
    const nn::AutoEncoder ae = nn::AutoEncoder::create(builder, "ae", 5, 3);
    randomize_biases(store, rng);
    const ParamId x = s.input(store, "x", {4, 5}, rng);
    const ParamId z = s.input(store, "z", {4, 3}, rng);
    s.check("layer", "ae_encode", store, [=](Graph& g) { return probe(g, nn::ae_encode(g, ae, g.param(x)), salt); });
    s.check("layer", "ae_decode", store, [=](Graph& g) { return probe(g, nn::ae_decode(g, ae, g.param(z)), salt); });
    std::vector<Tensor> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(uniform({5}, rng));
    s.check("layer", "ae_loss", store, [=](Graph& g) { return nn::ae_loss(g, ae, batch); });
  }
  {
    auto rng = s.rng("lstm");
    ParamStore store;
    nn::ParamBuilder builder(store, seed);
    const nn::LstmCell cell = nn::LstmCell::create(builder, "lstm", 3, 4);
    randomize_biases(store, rng);
    const ParamId h = s.input(store, "h", {2, 4}, rng);
    const ParamId c = s.input(store, "c", {2, 4}, rng);
    const ParamId x = s.input(store, "x", {2, 3}, rng);
    s.check("layer", "lstm_step", store, [=](Graph& g) {
      const nn::LstmState next = nn::lstm_step(g, cell, g.param(h), g.param(c), g.param(x));
      return add(probe(g, next.h, salt), probe(g, next.c, salt + 1));
    });
  }
  {
    auto rng = s.rng("skip");
    ParamStore store;
    nn::ParamBuilder builder(store, seed);
    const nn::SkipMlp mlp = nn::SkipMlp::create(builder, "skip", 4, 2);
    randomize_biases(store, rng);
    const ParamId x = s.input(store, "x", {3, 4}, rng);
    s.check("layer", "skip_mlp", store, [=](Graph& g) { return probe(g, nn::skip_forward(g, mlp, g.param(x)), salt); });
  }
  {
    auto rng = s.rng("mape_loss");
    ParamStore store;
    const ParamId p = s.input(store, "pred", {6}, rng);
    std::vector<double> targets(6);
    for (double& t : targets) t = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    s.check("layer", "mape_loss", store, [=](Graph& g) { return train::mape_loss(g, g.param(p), targets); });
  }
}

model::NetworkSample two_flow_sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto features = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = unit(rng);
    return v;
  };
  model::NetworkSample s;
  s.l2_features = {features(1), features(1)};
  s.l3_features = {features(1), features(1)};
  s.flows.push_back(model::Flow{features(5), {{0, 0}, {1, 1}}, 1.5});
  s.flows.push_back(model::Flow{features(5), {{1, 1}}, 0.5});
  return s;
}

void model_checks(Suite& s, std::uint64_t seed) {
  auto rng = s.rng("model");
  model::ModelConfig config;
  config.iterations = 2;
  config.hidden = 8;
  config.latent = 8;
  config.readout_depth = 2;
  config.flow_features = 5;
  config.l2_features = 1;
  config.l3_features = 1;
  model::ModelParams params = model::ModelParams::create(config, seed);
  randomize_biases(params.store, rng);
  const model::NetworkSample sample = two_flow_sample(rng);
  const std::uint64_t salt = 29;

  s.check("layer", "message_passing_round", params.store, [&](Graph& g) {
    const model::HiddenStates h0 = model::extract_features(g, params, sample);
    const model::HiddenStates h1 = model::message_passing_round(g, params, sample, h0);
    Var loss = add(probe(g, h1.h_f, salt), probe(g, h1.h_l2, salt + 1));
    return add(loss, probe(g, h1.h_l3, salt + 2));
  });
  s.check("model", "ae_smpn_forward", params.store,
          [&](Graph& g) { return probe(g, model::forward(g, params, sample), salt); });
}

}  // namespace

std::vector<GradCheckEntry> run_gradcheck_suite(const GradSuiteOptions& options) {
  Suite suite(options);
  op_checks(suite);
  layer_checks(suite, options.seed);
  model_checks(suite, options.seed);
  return suite.take();
}

}  // namespace aesmpn::cli
