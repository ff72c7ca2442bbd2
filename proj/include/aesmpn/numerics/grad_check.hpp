// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <string>

#include "aesmpn/numerics/graph.hpp"

namespace aesmpn::numerics {

/// Builds a scalar loss on a fresh graph bound to the parameter store.
using LossBuilder = std::function<Var(Graph&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;  // "<param>[<flat index>]" of the largest error
};

/// Gradients below this magnitude are compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-3;

/// Compares reverse-mode gradients against central differences
/// (f(t+eps) - f(t-eps)) / (2 eps) for every coordinate of the selected
/// parameters (all when ids is empty). The relative error of a coordinate is
/// |analytic - numeric| / max(|analytic|, |numeric|, kGradCheckFloor).
/// Parameters are restored before returning.
GradCheckResult grad_check(const LossBuilder& build, ParamStore& params, double eps,
                           std::span<const ParamId> ids = {});

}  // namespace aesmpn::numerics
