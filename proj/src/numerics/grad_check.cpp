// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "aesmpn/numerics/error.hpp"

namespace aesmpn::numerics {
namespace {

double evaluate(const LossBuilder& build, const ParamStore& params) {
  Graph g(params);
  return build(g).value().item();
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& build, ParamStore& params, double eps, std::span<const ParamId> ids) {
  if (!(eps > 0.0)) throw ContractError("grad_check needs eps > 0");
  std::vector<ParamId> selected(ids.begin(), ids.end());
  if (selected.empty()) {
    selected.resize(params.size());
    std::iota(selected.begin(), selected.end(), ParamId{0});
  }

  GradMap analytic;
  {
    Graph g(params);
    analytic = g.backward(build(g));
  }

  GradCheckResult result;
  for (ParamId id : selected) {
    Tensor& value = params.value(id);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + eps;
      const double up = evaluate(build, params);
      value[i] = saved - eps;
      const double down = evaluate(build, params);
      value[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[id][i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), kGradCheckFloor});
      const double err = std::fabs(a - numeric) / denom;
      ++result.coordinates;
      if (result.worst.empty() || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = params.name(id) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

}  // namespace aesmpn::numerics
