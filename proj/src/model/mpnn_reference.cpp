// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/model/mpnn_reference.hpp"

#include <cmath>

#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/ops.hpp"

namespace aesmpn::model {

RefResult generic_mpnn_reference(const RefGraph& graph, std::size_t rounds, const RefFunctions& fns) {
  const std::size_t n = graph.node_features.size();
  for (const RefEdge& e : graph.edges) {
    if (e.from >= n || e.to >= n) throw ContractError("reference MPNN edge endpoint out of range");
  }
  std::vector<Vec> h = graph.node_features;
  for (std::size_t k = 0; k < rounds; ++k) {
    std::vector<std::vector<Vec>> incoming(n);
    for (const RefEdge& e : graph.edges) {
      incoming[e.to].push_back(fns.message(h[e.to], h[e.from], e.features));
    }
    std::vector<Vec> next(n);
    Vec column;
    for (std::size_t v = 0; v < n; ++v) {
      Vec m(fns.message_width, 0.0);
      for (std::size_t j = 0; j < m.size(); ++j) {
        column.clear();
        for (const Vec& msg : incoming[v]) column.push_back(msg.at(j));
        m[j] = numerics::sorted_sum(column);
      }
      next[v] = fns.update(h[v], m);
    }
    h = std::move(next);
  }
  RefResult result;
  result.readout = fns.readout ? fns.readout(h) : 0.0;
  result.states = std::move(h);
  return result;
}

Vec TinyMlp::operator()(const Vec& x) const {
  Vec y(weight.size());
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (weight[i].size() != x.size()) throw DimensionError("TinyMlp input width mismatch");
    double s = bias.empty() ? 0.0 : bias[i];
    for (std::size_t j = 0; j < x.size(); ++j) s += weight[i][j] * x[j];
    y[i] = std::tanh(s);
  }
  return y;
}

}  // namespace aesmpn::model
