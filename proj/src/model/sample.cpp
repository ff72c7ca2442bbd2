// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/model/sample.hpp"

#include <string>

#include "aesmpn/numerics/error.hpp"

namespace aesmpn::model {
namespace {

void check_uniform(const std::vector<std::vector<double>>& rows, const char* what) {
  if (rows.empty()) throw ContractError(std::string("sample has no ") + what);
  for (const auto& r : rows) {
    if (r.size() != rows.front().size() || r.empty()) {
      throw DimensionError(std::string("ragged ") + what + " feature vectors");
    }
  }
}

}  // namespace

void check_sample(const NetworkSample& sample) {
  if (sample.flows.empty()) throw ContractError("sample has no flows");
  check_uniform(sample.l2_features, "l2 links");
  check_uniform(sample.l3_features, "l3 links");
  const std::size_t width = sample.flows.front().features.size();
  for (std::size_t f = 0; f < sample.flows.size(); ++f) {
    const Flow& flow = sample.flows[f];
    const std::string name = "flow " + std::to_string(f);
    if (flow.features.size() != width || width == 0) throw DimensionError(name + " has a ragged feature vector");
    if (flow.path.empty()) throw ContractError(name + " has an empty path");
    for (const Hop& hop : flow.path) {
      if (hop.l2 >= sample.l2_features.size() || hop.l3 >= sample.l3_features.size()) {
        throw ContractError(name + " references link (" + std::to_string(hop.l2) + "," + std::to_string(hop.l3) +
                            ") out of range");
      }
    }
    if (!(flow.target > 0.0)) throw ContractError(name + " has a non-positive target delay");
  }
}

std::size_t total_hops(const NetworkSample& sample) {
  std::size_t n = 0;
  for (const Flow& f : sample.flows) n += f.path.size();
  return n;
}

}  // namespace aesmpn::model
