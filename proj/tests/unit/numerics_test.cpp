// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/grad_check.hpp"
#include "aesmpn/numerics/graph.hpp"
#include "aesmpn/numerics/ops.hpp"
#include "aesmpn/numerics/param_store.hpp"
#include "aesmpn/numerics/random.hpp"

using namespace aesmpn;
using namespace aesmpn::numerics;

namespace {

std::vector<double> values(Var v) {
  const auto d = v.value().data();
  return {d.begin(), d.end()};
}

Tensor uniform(Shape shape, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& x : t.data()) x = u(rng);
  return t;
}

// Central differences on a single-input scalar function of one parameter.
double max_rel_error(const std::function<Var(Graph&, Var)>& f, const Tensor& x0, double eps = 1e-5) {
  ParamStore store;
  const ParamId id = store.add("x", x0);
  const ParamId ids[] = {id};
  return grad_check([&](Graph& g) { return f(g, g.param(id)); }, store, eps, ids).max_rel_error;
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("tensor shape contract") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
  CHECK_THROWS_AS(Tensor(Shape{0}), DimensionError);
  const Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.at(1, 2) == 6.0);
  CHECK(Tensor::scalar(4.0).item() == 4.0);
  CHECK_THROWS(m.item());
}

TEST_CASE("elementwise examples") {
  Graph g;
  CHECK(values(add(g.constant(Tensor::vector({1, 2})), g.constant(Tensor::vector({0, 0})))) ==
        std::vector<double>{1, 2});
  CHECK(values(mul(g.constant(Tensor::vector({1, 2})), g.constant(Tensor::vector({3, 4})))) ==
        std::vector<double>{3, 8});
  CHECK(values(sub(g.constant(Tensor::vector({5, 2})), g.constant(Tensor::vector({1, 4})))) ==
        std::vector<double>{4, -2});
  CHECK_THROWS_AS(add(g.constant(Tensor::vector({1, 2})), g.constant(Tensor::vector({1, 2, 3}))), DimensionError);
}

TEST_CASE("bias broadcast adds per row and its gradient is the column sum") {
  ParamStore store;
  const ParamId m = store.add("m", Tensor::matrix(2, 2, {1, 2, 3, 4}));
  const ParamId b = store.add("b", Tensor::vector({10, 20}));
  Graph g(store);
  Var y = add(g.param(m), g.param(b));
  CHECK(values(y) == std::vector<double>{11, 22, 13, 24});
  Var w = g.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  GradMap grads = g.backward(reduce_sum(mul(y, w)));
  CHECK(grads[b][0] == 4.0);
  CHECK(grads[b][1] == 6.0);
  const ParamId ids[] = {m, b};
  auto r = grad_check([&](Graph& h) { return reduce_sum(mul(add(h.param(m), h.param(b)), h.constant(w.value()))); },
                      store, 1e-5, ids);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("sigmoid examples") {
  Graph g;
  CHECK(sigmoid(g.constant(Tensor::scalar(0.0))).value().item() == 0.5);
  const double lo = sigmoid(g.constant(Tensor::scalar(-1000.0))).value().item();
  CHECK(lo == 0.0);
  CHECK(std::isfinite(lo));
  const double hi = sigmoid(g.constant(Tensor::scalar(1000.0))).value().item();
  CHECK(hi == 1.0);

  ParamStore store;
  const ParamId x = store.add("x", Tensor::scalar(0.0));
  Graph h(store);
  CHECK(h.backward(sigmoid(h.param(x)))[x].item() == 0.25);
}

TEST_CASE("tanh examples") {
  ParamStore store;
  const ParamId x = store.add("x", Tensor::scalar(0.0));
  Graph g(store);
  Var y = tanh_op(g.param(x));
  CHECK(y.value().item() == 0.0);
  CHECK(g.backward(y)[x].item() == 1.0);
  std::mt19937_64 rng(5);
  CHECK(max_rel_error([](Graph&, Var v) { return reduce_sum(tanh_op(v)); }, uniform({7}, rng)) < 1e-6);
}

TEST_CASE("selu examples") {
  Graph g;
  CHECK(selu(g.constant(Tensor::scalar(0.0))).value().item() == 0.0);
  CHECK(selu(g.constant(Tensor::scalar(1.0))).value().item() == kSeluLambda);
  CHECK(selu(g.constant(Tensor::scalar(1.0))).value().item() == doctest::Approx(1.0507).epsilon(1e-4));
  CHECK(max_rel_error([](Graph&, Var v) { return reduce_sum(selu(v)); }, Tensor::vector({0.5, -0.5})) < 1e-6);
}

TEST_CASE("activation ranges hold on random inputs") {
  std::mt19937_64 rng(11);
  Graph g;
  Var x = g.constant(uniform({500}, rng, -30.0, 30.0));
  for (double s : values(sigmoid(x))) CHECK((s >= 0.0 && s <= 1.0));
  Var small = g.constant(uniform({500}, rng, -5.0, 5.0));
  for (double s : values(sigmoid(small))) CHECK((s > 0.0 && s < 1.0));
  for (double t : values(tanh_op(small))) CHECK((t > -1.0 && t < 1.0));
}

TEST_CASE("concat examples") {
  ParamStore store;
  const ParamId a = store.add("a", Tensor::vector({1}));
  const ParamId b = store.add("b", Tensor::vector({2, 3}));
  Graph g(store);
  Var c = concat({g.param(a), g.param(b)}, 0);
  CHECK(values(c) == std::vector<double>{1, 2, 3});
  GradMap grads = g.backward(reduce_sum(c));
  CHECK(grads[a] == Tensor::vector({1}));
  CHECK(grads[b] == Tensor::vector({1, 1}));
  CHECK_THROWS_AS(concat(std::span<const Var>{}, 0), ContractError);
}

TEST_CASE("reductions") {
  ParamStore store;
  const ParamId x = store.add("x", Tensor::vector({1, 2, 3}));
  Graph g(store);
  Var s = reduce_sum(g.param(x));
  CHECK(s.value().item() == 6.0);
  CHECK(g.backward(s)[x] == Tensor::vector({1, 1, 1}));
  CHECK(reduce_mean(g.constant(Tensor::vector({2, 4}))).value().item() == 3.0);
  Var m = g.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  CHECK(values(reduce_sum(m, 0)) == std::vector<double>{5, 7, 9});
  CHECK(values(reduce_sum(m, 1)) == std::vector<double>{6, 15});
  CHECK(values(reduce_mean(m, 1)) == std::vector<double>{2, 5});
  CHECK_THROWS_AS(reduce_sum(m, 2), DimensionError);
}

TEST_CASE("matmul and matmul_nt agree with hand results") {
  Graph g;
  Var a = g.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  Var b = g.constant(Tensor::matrix(2, 2, {5, 6, 7, 8}));
  CHECK(values(matmul(a, b)) == std::vector<double>{19, 22, 43, 50});
  CHECK(values(matmul_nt(a, b)) == std::vector<double>{17, 23, 39, 53});
  CHECK(values(transpose(a)) == std::vector<double>{1, 3, 2, 4});
  CHECK_THROWS_AS(matmul(a, g.constant(Tensor::matrix(3, 1, {1, 2, 3}))), DimensionError);
}

TEST_CASE("gather, scatter and segment_sum") {
  Graph g;
  Var x = g.constant(Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6}));
  const std::size_t idx[] = {2, 0, 2};
  CHECK(values(gather_rows(x, idx)) == std::vector<double>{5, 6, 1, 2, 5, 6});
  const std::size_t seg[] = {1, 0, 1};
  CHECK(values(segment_sum(x, seg, 3)) == std::vector<double>{3, 4, 6, 8, 0, 0});
  const std::size_t at[] = {1};
  CHECK(values(scatter_rows(x, at, g.constant(Tensor::matrix(1, 2, {9, 9})))) ==
        std::vector<double>{1, 2, 9, 9, 5, 6});
  const std::size_t dup[] = {1, 1};
  CHECK_THROWS_AS(scatter_rows(x, dup, g.constant(Tensor::matrix(2, 2, {0, 0, 0, 0}))), ContractError);
  const std::size_t bad[] = {3};
  CHECK_THROWS_AS(gather_rows(x, bad), DimensionError);
}

TEST_CASE("sorted_sum is independent of input order") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<double> v(200);
  for (double& x : v) x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 12) - 6);
  std::vector<double> w = v;
  const double a = sorted_sum(v);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(w.begin(), w.end(), rng);
    std::vector<double> c = w;
    CHECK(sorted_sum(c) == a);
  }
}

TEST_CASE("segment_sum is bit-identical under row permutation") {
  std::mt19937_64 rng(9);
  const std::size_t n = 40, w = 5, k = 6;
  Tensor x = uniform({n, w}, rng, -1e3, 1e3);
  std::vector<std::size_t> seg(n);
  for (auto& s : seg) s = rng() % k;
  Graph g;
  const Tensor base = segment_sum(g.constant(x), seg, k).value();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Tensor px({n, w});
  std::vector<std::size_t> pseg(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < w; ++c) px.at(r, c) = x.at(perm[r], c);
    pseg[r] = seg[perm[r]];
  }
  CHECK(segment_sum(g.constant(px), pseg, k).value() == base);
}

TEST_CASE("backward of x^2 at 3 is 6") {
  ParamStore store;
  const ParamId x = store.add("x", Tensor::scalar(3.0));
  Graph g(store);
  Var v = g.param(x);
  CHECK(g.backward(mul(v, v))[x].item() == 6.0);
}

TEST_CASE("sigmoid(w*x) chains like finite differences") {
  ParamStore store;
  const ParamId w = store.add("w", Tensor::vector({0.7, -1.3, 0.2}));
  const Tensor x = Tensor::vector({1.5, 0.4, -2.0});
  auto r = grad_check([&](Graph& g) { return reduce_sum(sigmoid(mul(g.param(w), g.constant(x)))); }, store, 1e-5);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("unreachable parameter gets an exactly zero gradient") {
  ParamStore store;
  const ParamId used = store.add("used", Tensor::vector({1, 2}));
  const ParamId unused = store.add("unused", Tensor::matrix(2, 2, {1, 2, 3, 4}));
  Graph g(store);
  g.param(unused);
  GradMap grads = g.backward(reduce_sum(tanh_op(g.param(used))));
  CHECK(grads[unused] == Tensor(Shape{2, 2}));
  for (double v : grads[unused].data()) CHECK(std::signbit(v) == false);
}

TEST_CASE("backward rejects a non-scalar loss") {
  ParamStore store;
  const ParamId x = store.add("x", Tensor::vector({1, 2}));
  Graph g(store);
  CHECK_THROWS_AS(g.backward(g.param(x)), ContractError);
}

TEST_CASE("non-finite values are rejected at record time") {
  Graph g;
  CHECK_THROWS_AS(g.constant(Tensor::vector({std::numeric_limits<double>::quiet_NaN()})), NumericError);
  Var big = g.constant(Tensor::vector({1e300}));
  CHECK_THROWS_AS(mul(big, big), NumericError);
}

TEST_CASE("every op passes a random-input gradient check") {
  std::mt19937_64 rng(17);
  const Tensor a = uniform({3, 4}, rng);
  const Tensor b = uniform({4, 2}, rng);
  const Tensor c = uniform({3, 4}, rng);
  const Tensor bias = uniform({4}, rng);
  const Tensor probe = uniform({3, 4}, rng);
  auto dot = [](Graph& g, Var v, const Tensor& p) { return reduce_sum(mul(v, g.constant(p))); };
  const std::vector<std::pair<const char*, std::function<Var(Graph&, Var)>>> cases = {
      {"matmul", [&](Graph& g, Var x) { return reduce_sum(tanh_op(matmul(x, g.constant(b)))); }},
      {"matmul_nt", [&](Graph& g, Var x) { return reduce_sum(tanh_op(matmul_nt(g.constant(c), x))); }},
      {"transpose", [&](Graph& g, Var x) { return dot(g, transpose(transpose(x)), probe); }},
      {"add_bias", [&](Graph& g, Var x) { return dot(g, add(x, g.constant(bias)), probe); }},
      {"sub", [&](Graph& g, Var x) { return dot(g, sub(g.constant(c), x), probe); }},
      {"mul", [&](Graph& g, Var x) { return dot(g, mul(x, x), probe); }},
      {"scale", [&](Graph& g, Var x) { return dot(g, scale(x, -1.7), probe); }},
      {"sigmoid", [&](Graph& g, Var x) { return dot(g, sigmoid(x), probe); }},
      {"tanh", [&](Graph& g, Var x) { return dot(g, tanh_op(x), probe); }},
      {"selu", [&](Graph& g, Var x) { return dot(g, selu(x), probe); }},
      {"abs", [&](Graph& g, Var x) { return dot(g, abs_op(x), probe); }},
      {"reduce_mean_axis", [&](Graph& g, Var x) { return reduce_sum(mul(reduce_mean(x, 0), reduce_sum(x, 0))); }},
      {"reshape", [&](Graph& g, Var x) { return dot(g, reshape(reshape(x, {12}), {3, 4}), probe); }},
  };
  for (const auto& [name, f] : cases) {
    CAPTURE(name);
    CHECK(max_rel_error(f, a) < 1e-4);
  }
}

TEST_CASE("forward evaluation is deterministic") {
  std::mt19937_64 rng(1);
  const Tensor a = uniform({5, 6}, rng);
  const Tensor b = uniform({6, 3}, rng);
  Graph g1, g2;
  CHECK(sigmoid(matmul(g1.constant(a), g1.constant(b))).value() ==
        sigmoid(matmul(g2.constant(a), g2.constant(b))).value());
}

TEST_CASE("param store and grad map") {
  ParamStore store;
  const ParamId a = store.add("a", Tensor::vector({3, 4}));
  CHECK_THROWS(store.add("a", Tensor::vector({1})));
  CHECK(store.find("a") == a);
  CHECK_FALSE(store.find("b").has_value());
  CHECK(store.coordinate_count() == 2);
  GradMap grads(store);
  grads[a] = Tensor::vector({3, 4});
  CHECK(grads.global_norm() == 5.0);
  grads.scale(0.5);
  CHECK(grads[a] == Tensor::vector({1.5, 2}));
}

TEST_CASE("named random streams") {
  CHECK(derive_seed(1, "init") == derive_seed(1, "init"));
  CHECK(derive_seed(1, "init") != derive_seed(1, "shuffle"));
  CHECK(derive_seed(1, "shuffle", 0) != derive_seed(1, "shuffle", 1));
  CHECK(derive_seed(1, "init") != derive_seed(2, "init"));
  auto r1 = make_rng(7, "gen", 3);
  auto r2 = make_rng(7, "gen", 3);
  CHECK(r1() == r2());
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

}  // TEST_SUITE
