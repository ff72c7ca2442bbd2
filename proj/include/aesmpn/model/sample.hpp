// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace aesmpn::model {

/// One hop of a flow: the layer-2 link and layer-3 link it traverses.
struct Hop {
  std::size_t l2 = 0;
  std::size_t l3 = 0;
  friend bool operator==(const Hop&, const Hop&) = default;
  friend auto operator<=>(const Hop&, const Hop&) = default;
};

struct Flow {
  std::vector<double> features;
  std::vector<Hop> path;
  double target = 0.0;  // normalized delay
  friend bool operator==(const Flow&, const Flow&) = default;
};

/// Model-ready topology snapshot: normalized entity features and per-flow paths.
struct NetworkSample {
  std::vector<std::vector<double>> l2_features;
  std::vector<std::vector<double>> l3_features;
  std::vector<Flow> flows;
  friend bool operator==(const NetworkSample&, const NetworkSample&) = default;
};

/// Throws ContractError/DimensionError when paths are empty or out of range,
/// feature widths are ragged, targets are not positive, or there are no flows.
void check_sample(const NetworkSample& sample);

std::size_t total_hops(const NetworkSample& sample);

}  // namespace aesmpn::model
