// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aesmpn/model/sample.hpp"
#include "aesmpn/nn/layers.hpp"
#include "aesmpn/numerics/graph.hpp"

namespace aesmpn::model {

using numerics::Graph;
using numerics::Var;

struct ModelConfig {
  std::size_t iterations = 8;     // message-passing rounds K
  std::size_t hidden = 64;        // state width, also the readout width
  std::size_t latent = 64;        // AE embedding size; must equal hidden
  std::size_t readout_depth = 0;  // residual blocks in the readout
  std::size_t flow_features = 0;
  std::size_t l2_features = 0;
  std::size_t l3_features = 0;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Named model variants: ae-mpnn (no residual blocks), ae-smpn2/3/4.
std::size_t readout_depth_for(std::string_view variant);
std::string variant_name(std::size_t readout_depth);

/// All trainable weights. Layer structs index into `store`.
struct ModelParams {
  ModelConfig config;
  numerics::ParamStore store;
  nn::AutoEncoder ae_f, ae_l2, ae_l3;
  nn::LstmCell msg_f;   // runs along each flow's path
  nn::LstmCell upd_l2;  // updates L2 link states from aggregated flow messages
  nn::LstmCell upd_l3;  // updates L3 link states from associated L2 states
  nn::LinearLayer readout_proj;  // [h_f, mean h_l2, mean h_l3] -> hidden
  nn::SkipMlp readout;

  static ModelParams create(const ModelConfig& config, std::uint64_t seed);
  /// Adopts trained values; throws DimensionError naming the first parameter
  /// whose name or extents disagree with the layout implied by config.
  static ModelParams from_store(const ModelConfig& config, numerics::ParamStore store);
};

/// Per-entity state matrices, one row per flow / L2 link / L3 link.
struct HiddenStates {
  Var h_f, c_f;
  Var h_l2, c_l2;
  Var h_l3, c_l3;
};

/// Index plan derived from a sample's paths, shared by all rounds.
struct SamplePlan {
  struct HopStep {
    std::vector<std::size_t> flows;  // flows whose path has at least t+1 hops
    std::vector<std::size_t> l2;
    std::vector<std::size_t> l3;
    bool all_flows = false;          // flows == 0..F-1
  };

  std::size_t flow_count = 0;
  std::size_t l2_count = 0;
  std::size_t l3_count = 0;
  std::vector<HopStep> steps;
  std::vector<std::size_t> message_l2;  // l2 link of each (step, active flow) row
  std::vector<std::size_t> pair_l2;     // distinct (l2, l3) pairs over all paths
  std::vector<std::size_t> pair_l3;
  std::vector<std::size_t> hop_flow;    // every hop in flow order, path order
  std::vector<std::size_t> hop_l2;
  std::vector<std::size_t> hop_l3;
  std::vector<double> inv_path_len;

  explicit SamplePlan(const NetworkSample& sample);
};

/// Initial states from the three encoders; cell states are zero.
HiddenStates extract_features(Graph& g, const ModelParams& params, const NetworkSample& sample);

/// One round: flow LSTM along paths, L2 update from summed flow messages,
/// L3 update from summed states of associated L2 links.
HiddenStates message_passing_round(Graph& g, const ModelParams& params, const SamplePlan& plan,
                                   const HiddenStates& states);
HiddenStates message_passing_round(Graph& g, const ModelParams& params, const NetworkSample& sample,
                                   const HiddenStates& states);

/// Drops links that no flow traverses and relabels the rest in ascending
/// index order. Off-path links never reach a prediction, so forward() runs
/// on the restricted sample.
NetworkSample restrict_to_paths(const NetworkSample& sample);

/// Path-mean pooling, projection and residual MLP head, shape [flows].
Var readout(Graph& g, const ModelParams& params, const SamplePlan& plan, const HiddenStates& states);

/// Per-flow predicted delay in normalized units, shape [flows].
Var forward(Graph& g, const ModelParams& params, const NetworkSample& sample);

/// Forward pass on a private graph.
std::vector<double> predict(const ModelParams& params, const NetworkSample& sample);

}  // namespace aesmpn::model
