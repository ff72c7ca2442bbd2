// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

// Plain sum-aggregation MPNN on ordinary vectors (no autodiff). It is the
// textbook message / update / readout contract that the AE-SMPN round
// specializes, and serves as a test oracle.

namespace aesmpn::model {

using Vec = std::vector<double>;

struct RefEdge {
  std::size_t from = 0;  // neighbour w
  std::size_t to = 0;    // receiving node v
  Vec features;          // e_vw
};

struct RefGraph {
  std::vector<Vec> node_features;  // x_v, also h_v at round 0
  std::vector<RefEdge> edges;
};

struct RefFunctions {
  std::function<Vec(const Vec& h_v, const Vec& h_w, const Vec& e_vw)> message;
  std::function<Vec(const Vec& h_v, const Vec& m_v)> update;
  std::function<double(const std::vector<Vec>& states)> readout;
  std::size_t message_width = 0;
};

struct RefResult {
  std::vector<Vec> states;
  double readout = 0.0;
};

/// K rounds of m_v = sum over incoming edges of message(h_v, h_w, e_vw),
/// h_v = update(h_v, m_v); then readout over the final states. Message sums
/// are order-invariant (ascending summation per coordinate).
RefResult generic_mpnn_reference(const RefGraph& graph, std::size_t rounds, const RefFunctions& fns);

/// One tanh layer y = tanh(W x + b), handy as a pluggable message/update net.
struct TinyMlp {
  std::vector<Vec> weight;  // out x in
  Vec bias;
  Vec operator()(const Vec& x) const;
};

}  // namespace aesmpn::model
