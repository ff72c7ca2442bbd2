// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aesmpn/numerics/tensor.hpp"

namespace aesmpn::numerics {

using ParamId = std::size_t;

/// Named trainable tensors. Ids are dense and follow registration order.
class ParamStore {
 public:
  ParamId add(std::string name, Tensor value);

  std::size_t size() const noexcept { return values_.size(); }
  const std::string& name(ParamId id) const { return names_.at(id); }
  const Tensor& value(ParamId id) const { return values_.at(id); }
  Tensor& value(ParamId id) { return values_.at(id); }
  std::optional<ParamId> find(std::string_view name) const;

  /// Total number of scalar coordinates over all parameters.
  std::size_t coordinate_count() const;

  friend bool operator==(const ParamStore&, const ParamStore&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

/// One gradient tensor per parameter of a store, zero where the loss does
/// not depend on the parameter.
class GradMap {
 public:
  GradMap() = default;
  explicit GradMap(const ParamStore& store);

  std::size_t size() const noexcept { return grads_.size(); }
  const Tensor& operator[](ParamId id) const { return grads_.at(id); }
  Tensor& operator[](ParamId id) { return grads_.at(id); }

  double global_norm() const;
  void scale(double factor);
  bool all_finite() const;

 private:
  std::vector<Tensor> grads_;
};

}  // namespace aesmpn::numerics
