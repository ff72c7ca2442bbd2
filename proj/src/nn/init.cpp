// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/nn/init.hpp"

#include <cmath>

#include "aesmpn/numerics/random.hpp"

namespace aesmpn::nn {

Tensor init_params(const Shape& shape, InitKind kind, std::mt19937_64& rng) {
  Tensor t(shape);
  if (kind == InitKind::Bias) return t;
  const double fan_in = static_cast<double>(shape.back());
  std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / fan_in));
  for (double& v : t.data()) v = normal(rng);
  return t;
}

Tensor init_params(const Shape& shape, InitKind kind, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed, "init");
  return init_params(shape, kind, rng);
}

ParamBuilder::ParamBuilder(ParamStore& store, std::uint64_t seed) : store_(store), rng_(make_rng(seed, "init")) {}

ParamId ParamBuilder::weight(const std::string& name, std::size_t out, std::size_t in) {
  return store_.add(name, init_params({out, in}, InitKind::Weight, rng_));
}

ParamId ParamBuilder::bias(const std::string& name, std::size_t n) {
  return store_.add(name, init_params({n}, InitKind::Bias, rng_));
}

}  // namespace aesmpn::nn
