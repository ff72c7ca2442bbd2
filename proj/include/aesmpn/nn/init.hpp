// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "aesmpn/numerics/param_store.hpp"

namespace aesmpn::nn {

using numerics::ParamId;
using numerics::ParamStore;
using numerics::Shape;
using numerics::Tensor;

enum class InitKind { Weight, Bias };

/// Weights: zero-mean normal with variance 1/fan_in (fan_in = last extent).
/// Biases: exactly zero.
Tensor init_params(const Shape& shape, InitKind kind, std::mt19937_64& rng);
Tensor init_params(const Shape& shape, InitKind kind, std::uint64_t seed);

/// Registers freshly initialised parameters into a store from one stream.
class ParamBuilder {
 public:
  ParamBuilder(ParamStore& store, std::uint64_t seed);

  ParamId weight(const std::string& name, std::size_t out, std::size_t in);
  ParamId bias(const std::string& name, std::size_t n);

  ParamStore& store() { return store_; }

 private:
  ParamStore& store_;
  std::mt19937_64 rng_;
};

}  // namespace aesmpn::nn
