// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "aesmpn/nn/checkpoint.hpp"
#include "aesmpn/nn/init.hpp"
#include "aesmpn/nn/layers.hpp"
#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/grad_check.hpp"
#include "aesmpn/numerics/ops.hpp"
#include "support.hpp"

using namespace aesmpn;
using namespace aesmpn::nn;
using numerics::GradMap;

namespace {

void zero_all(ParamStore& store) {
  for (ParamId id = 0; id < store.size(); ++id) {
    for (double& v : store.value(id).data()) v = 0.0;
  }
}

void randomize(ParamStore& store, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (ParamId id = 0; id < store.size(); ++id) {
    for (double& v : store.value(id).data()) v = u(rng);
  }
}

std::vector<double> values(Var v) {
  const auto d = v.value().data();
  return {d.begin(), d.end()};
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("init is seed-deterministic with zero biases") {
  CHECK(init_params({4, 5}, InitKind::Weight, 3) == init_params({4, 5}, InitKind::Weight, 3));
  CHECK(init_params({4, 5}, InitKind::Weight, 3) != init_params({4, 5}, InitKind::Weight, 4));
  const Tensor b = init_params({16}, InitKind::Bias, 3);
  for (double v : b.data()) CHECK(v == 0.0);
}

TEST_CASE("weight init variance is close to 1/fan_in") {
  const std::size_t fan_in = 25;
  const Tensor w = init_params({400, fan_in}, InitKind::Weight, 99);
  REQUIRE(w.size() == 10000);
  double mean = 0.0;
  for (double v : w.data()) mean += v;
  mean /= static_cast<double>(w.size());
  double var = 0.0;
  for (double v : w.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w.size() - 1);
  const double want = 1.0 / static_cast<double>(fan_in);
  CHECK(std::abs(var - want) < 0.2 * want);
}

TEST_CASE("linear layer forward on vectors and batches") {
  ParamStore store;
  ParamBuilder pb(store, 1);
  LinearLayer lin = LinearLayer::create(pb, "lin", 2, 3);
  store.value(lin.weight) = Tensor::matrix(3, 2, {1, 0, 0, 1, 1, 1});
  store.value(lin.bias) = Tensor::vector({0.5, -0.5, 0});
  Graph g(store);
  CHECK(values(lin.forward(g, g.constant(Tensor::vector({2, 3})))) == std::vector<double>{2.5, 2.5, 5});
  CHECK(values(lin.forward(g, g.constant(Tensor::matrix(2, 2, {2, 3, 1, 1})))) ==
        std::vector<double>{2.5, 2.5, 5, 1.5, 0.5, 2});
  CHECK_THROWS_AS(lin.forward(g, g.constant(Tensor::vector({1, 2, 3}))), DimensionError);
}

TEST_CASE("autoencoder examples") {
  ParamStore store;
  ParamBuilder pb(store, 1);
  AutoEncoder ae = AutoEncoder::create(pb, "ae", 2, 2);
  store.value(ae.encoder.weight) = Tensor::matrix(2, 2, {1, 0, 0, 1});
  store.value(ae.decoder.weight) = Tensor::matrix(2, 2, {1, 0, 0, 1});
  Graph g(store);
  Var x = g.constant(Tensor::vector({1, 2}));
  CHECK(values(ae_encode(g, ae, x)) == std::vector<double>{1, 2});
  CHECK(values(ae_decode(g, ae, x)) == std::vector<double>{1, 2});
  CHECK(values(ae_decode(g, ae, ae_encode(g, ae, x))) == std::vector<double>{1, 2});
  const Tensor batch[] = {Tensor::vector({1, 2}), Tensor::vector({-3, 0.5})};
  CHECK(ae_loss(g, ae, batch).value().item() == 0.0);

  ParamStore s2;
  ParamBuilder pb2(s2, 1);
  AutoEncoder narrow = AutoEncoder::create(pb2, "ae", 2, 1);
  s2.value(narrow.encoder.weight) = Tensor::matrix(1, 2, {1, 1});
  s2.value(narrow.encoder.bias) = Tensor::vector({0.5});
  Graph g2(s2);
  CHECK(ae_encode(g2, narrow, g2.constant(Tensor::vector({1, 2}))).value().item() == 3.5);
  zero_all(s2);
  Graph g3(s2);
  const Tensor one[] = {Tensor::vector({1, 0})};
  CHECK(ae_loss(g3, narrow, one).value().item() == 1.0);
}

TEST_CASE("autoencoder round trip keeps the input extent") {
  for (std::size_t in : {1, 3, 8}) {
    for (std::size_t latent : {1, 2, 5}) {
      ParamStore store;
      ParamBuilder pb(store, in * 10 + latent);
      AutoEncoder ae = AutoEncoder::create(pb, "ae", in, latent);
      randomize(store, in + latent);
      Graph g(store);
      Var y = ae_decode(g, ae, ae_encode(g, ae, g.constant(Tensor(Shape{in}))));
      CHECK(y.shape() == Shape{in});
    }
  }
}

TEST_CASE("layer gradients match finite differences") {
  ParamStore store;
  ParamBuilder pb(store, 5);
  LinearLayer lin = LinearLayer::create(pb, "lin", 3, 2);
  AutoEncoder ae = AutoEncoder::create(pb, "ae", 4, 2);
  LstmCell cell = LstmCell::create(pb, "lstm", 3, 2);
  SkipMlp skip = SkipMlp::create(pb, "skip", 3, 2);
  randomize(store, 6);
  const Tensor x3 = Tensor::vector({0.3, -1.2, 0.8});
  const Tensor x4 = Tensor::vector({0.3, -1.2, 0.8, 1.5});
  auto check = [&](const numerics::LossBuilder& f) { return numerics::grad_check(f, store, 1e-5).max_rel_error; };
  CHECK(check([&](Graph& g) { return numerics::reduce_sum(numerics::tanh_op(lin.forward(g, g.constant(x3)))); }) <
        1e-4);
  CHECK(check([&](Graph& g) {
          const Tensor batch[] = {x4, Tensor::vector({1, 0, -1, 0.5})};
          return ae_loss(g, ae, batch);
        }) < 1e-4);
  CHECK(check([&](Graph& g) {
          LstmState s = lstm_step(g, cell, g.constant(Tensor::vector({0.1, -0.4})),
                                  g.constant(Tensor::vector({0.7, 0.2})), g.constant(x3));
          return numerics::add(numerics::reduce_sum(s.h), numerics::scale(numerics::reduce_sum(s.c), 0.3));
        }) < 1e-4);
  CHECK(check([&](Graph& g) { return numerics::reduce_sum(skip_forward(g, skip, g.constant(x3))); }) < 1e-4);
}

TEST_CASE("zero-parameter lstm closed form") {
  ParamStore store;
  ParamBuilder pb(store, 1);
  LstmCell cell = LstmCell::create(pb, "lstm", 1, 1);
  zero_all(store);
  Graph g(store);
  LstmState s = lstm_step(g, cell, g.constant(Tensor::vector({0})), g.constant(Tensor::vector({1})),
                          g.constant(Tensor::vector({0.3})));
  CHECK(s.c.value().item() == 0.5);
  CHECK(std::abs(s.h.value().item() - 0.5 * std::tanh(0.5)) <= 1e-15);
  CHECK(s.h.value().item() == doctest::Approx(0.23105).epsilon(1e-4));
  LstmState z = lstm_step(g, cell, g.constant(Tensor::vector({0})), g.constant(Tensor::vector({0})),
                          g.constant(Tensor::vector({5})));
  CHECK(z.h.value().item() == 0.0);
  CHECK(z.c.value().item() == 0.0);
}

TEST_CASE("zero-parameter lstm halves any cell state for any input") {
  ParamStore store;
  ParamBuilder pb(store, 1);
  LstmCell cell = LstmCell::create(pb, "lstm", 4, 3);
  zero_all(store);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g(store);
    const Tensor c0 = Tensor::vector({u(rng), u(rng), u(rng)});
    LstmState s = lstm_step(g, cell, g.constant(Tensor::vector({u(rng), u(rng), u(rng)})), g.constant(c0),
                            g.constant(Tensor::vector({u(rng), u(rng), u(rng), u(rng)})));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(s.c.value()[i] == 0.5 * c0[i]);
      CHECK(s.h.value()[i] == 0.5 * std::tanh(0.5 * c0[i]));
    }
  }
}

TEST_CASE("lstm gates share one shape") {
  ParamStore store;
  ParamBuilder pb(store, 1);
  LstmCell cell = LstmCell::create(pb, "lstm", 3, 4);
  for (ParamId w : {cell.w_forget, cell.w_input, cell.w_candidate, cell.w_output}) {
    CHECK(store.value(w).shape() == Shape{4, 7});
  }
}

TEST_CASE("skip mlp with zero hidden parameters is the identity at every block") {
  ParamStore store;
  ParamBuilder pb(store, 1);
  SkipMlp skip = SkipMlp::create(pb, "skip", 4, 3);
  for (const auto& layer : skip.hidden) {
    for (double& v : store.value(layer.weight).data()) v = 0.0;
  }
  store.value(skip.head.weight) = Tensor::matrix(1, 4, {1, 1, 1, 1});
  Graph g(store);
  const Tensor x = Tensor::vector({0.25, -1.5, 3.0, 0.125});
  std::vector<Var> trace;
  Var y = skip_forward(g, skip, g.constant(x), &trace);
  REQUIRE(trace.size() == 3);
  for (Var t : trace) CHECK(t.value() == x);
  CHECK(y.value().item() == 0.25 - 1.5 + 3.0 + 0.125);
}

TEST_CASE("skip mlp without hidden layers is the head") {
  ParamStore store;
  ParamBuilder pb(store, 1);
  SkipMlp skip = SkipMlp::create(pb, "skip", 2, 0);
  CHECK(skip.hidden.empty());
  store.value(skip.head.weight) = Tensor::matrix(1, 2, {2, -1});
  store.value(skip.head.bias) = Tensor::vector({0.5});
  Graph g(store);
  CHECK(skip_forward(g, skip, g.constant(Tensor::vector({3, 1}))).value().item() == 5.5);
  CHECK(skip_forward(g, skip, g.constant(Tensor::matrix(2, 2, {3, 1, 0, 0}))).shape() == Shape{2, 1});
}

TEST_CASE("checkpoint round trip is exact") {
  Checkpoint ck;
  ck.meta["model"] = "ae-smpn2";
  ck.meta["note"] = "with spaces inside";
  ParamBuilder pb(ck.params, 77);
  pb.weight("a.weight", 3, 4);
  pb.bias("a.bias", 3);
  ck.params.value(1)[0] = 0.1 + 0.2;
  ck.params.value(1)[1] = -1e-300;
  std::stringstream ss;
  write_checkpoint(ss, ck);
  const Checkpoint back = read_checkpoint(ss);
  CHECK(back.meta == ck.meta);
  CHECK(back.params == ck.params);

  const auto dir = testing::scratch_dir("ckpt");
  save_checkpoint(dir / "c.txt", ck);
  CHECK(load_checkpoint(dir / "c.txt").params == ck.params);
}

TEST_CASE("malformed checkpoints are rejected") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_checkpoint(in);
  };
  CHECK_THROWS_AS(parse(""), CheckpointError);
  CHECK_THROWS_AS(parse("something else 1\nend\n"), CheckpointError);
  CHECK_THROWS_AS(parse("aesmpn-checkpoint 2\nend\n"), CheckpointError);
  CHECK_THROWS_AS(parse("aesmpn-checkpoint 1\nparam w 1 2 2\n1\nend\n"), CheckpointError);
  CHECK_THROWS_AS(parse("aesmpn-checkpoint 1\nparam w 1 2 2\n1 x\nend\n"), CheckpointError);
  CHECK_THROWS_AS(parse("aesmpn-checkpoint 1\nparam w 1 1 1\n1\n"), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.txt"), CheckpointError);
  CHECK(parse("aesmpn-checkpoint 1\nparam w 1 2 2\n1 2\nend\n").params.value(0) == Tensor::vector({1, 2}));
}

}  // TEST_SUITE
