// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/train/adam.hpp"

#include <cmath>

#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/kernels.hpp"

namespace aesmpn::train {

using numerics::shape_string;

AdamState::AdamState(const numerics::ParamStore& params) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (numerics::ParamId id = 0; id < params.size(); ++id) {
    m_.emplace_back(params.value(id).shape());
    v_.emplace_back(params.value(id).shape());
  }
}

void AdamState::step(numerics::ParamStore& params, const numerics::GradMap& grads, const AdamConfig& config) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw DimensionError("adam_step: state for " + std::to_string(m_.size()) + " parameters, got " +
                         std::to_string(params.size()) + " parameters and " + std::to_string(grads.size()) +
                         " gradients");
  }
  for (numerics::ParamId id = 0; id < params.size(); ++id) {
    if (params.value(id).shape() != m_[id].shape() || grads[id].shape() != m_[id].shape()) {
      throw DimensionError("adam_step: '" + params.name(id) + "' has shape " + shape_string(params.value(id).shape()) +
                           ", gradient " + shape_string(grads[id].shape()));
    }
  }
  ++t_;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t_));
  const auto& k = numerics::kernels::active();
  for (numerics::ParamId id = 0; id < params.size(); ++id) {
    numerics::Tensor& p = params.value(id);
    k.adam_update(p.size(), p.raw(), m_[id].raw(), v_[id].raw(), grads[id].raw(), config.learning_rate,
                  config.beta1, config.beta2, config.eps, bias1, bias2);
  }
}

double clip_global_norm(numerics::GradMap& grads, double max_norm) {
  const double norm = grads.global_norm();
  if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
  return norm;
}

}  // namespace aesmpn::train
