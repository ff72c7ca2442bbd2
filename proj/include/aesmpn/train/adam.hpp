// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "aesmpn/numerics/param_store.hpp"

namespace aesmpn::train {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment estimates per parameter, plus the step count.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const numerics::ParamStore& params);

  std::uint64_t step_count() const noexcept { return t_; }
  const numerics::Tensor& first_moment(numerics::ParamId id) const { return m_.at(id); }
  const numerics::Tensor& second_moment(numerics::ParamId id) const { return v_.at(id); }

  /// theta -= lr * m_hat / (sqrt(v_hat) + eps) with bias-corrected moments.
  void step(numerics::ParamStore& params, const numerics::GradMap& grads, const AdamConfig& config);

 private:
  std::uint64_t t_ = 0;
  std::vector<numerics::Tensor> m_;
  std::vector<numerics::Tensor> v_;
};

inline void adam_step(AdamState& state, numerics::ParamStore& params, const numerics::GradMap& grads,
                      const AdamConfig& config) {
  state.step(params, grads, config);
}

/// Scales grads so their global L2 norm is at most max_norm. Returns the
/// norm before clipping.
double clip_global_norm(numerics::GradMap& grads, double max_norm);

}  // namespace aesmpn::train
