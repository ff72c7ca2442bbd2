// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/numerics/param_store.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aesmpn::numerics {

ParamId ParamStore::add(std::string name, Tensor value) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

std::optional<ParamId> ParamStore::find(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<ParamId>(it - names_.begin());
}

std::size_t ParamStore::coordinate_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

GradMap::GradMap(const ParamStore& store) {
  grads_.reserve(store.size());
  for (ParamId id = 0; id < store.size(); ++id) grads_.emplace_back(store.value(id).shape());
}

double GradMap::global_norm() const {
  double sq = 0.0;
  for (const auto& g : grads_) {
    for (double v : g.data()) sq += v * v;
  }
  return std::sqrt(sq);
}

void GradMap::scale(double factor) {
  for (auto& g : grads_) {
    for (double& v : g.data()) v *= factor;
  }
}

bool GradMap::all_finite() const {
  return std::all_of(grads_.begin(), grads_.end(), [](const Tensor& g) { return g.all_finite(); });
}

}  // namespace aesmpn::numerics
