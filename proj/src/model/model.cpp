// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/model/model.hpp"

#include <algorithm>
#include <set>

#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/ops.hpp"

namespace aesmpn::model {

using namespace aesmpn::numerics;

void ModelConfig::validate() const {
  if (hidden == 0) throw ContractError("model hidden width must be positive");
  if (hidden != latent) {
    throw ContractError("AE embedding size (" + std::to_string(latent) + ") must equal hidden width (" +
                        std::to_string(hidden) + ")");
  }
  if (flow_features == 0 || l2_features == 0 || l3_features == 0) {
    throw ContractError("model feature widths must be positive");
  }
}

std::size_t readout_depth_for(std::string_view variant) {
  if (variant == "ae-mpnn") return 0;
  if (variant == "ae-smpn2") return 2;
  if (variant == "ae-smpn3") return 3;
  if (variant == "ae-smpn4") return 4;
  throw std::invalid_argument("unknown model '" + std::string(variant) +
                              "' (expected ae-mpnn, ae-smpn2, ae-smpn3 or ae-smpn4)");
}

std::string variant_name(std::size_t readout_depth) {
  return readout_depth == 0 ? "ae-mpnn" : "ae-smpn" + std::to_string(readout_depth);
}

ModelParams ModelParams::create(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams p;
  p.config = config;
  nn::ParamBuilder b(p.store, seed);
  const std::size_t h = config.hidden;
  p.ae_f = nn::AutoEncoder::create(b, "ae_f", config.flow_features, config.latent);
  p.ae_l2 = nn::AutoEncoder::create(b, "ae_l2", config.l2_features, config.latent);
  p.ae_l3 = nn::AutoEncoder::create(b, "ae_l3", config.l3_features, config.latent);
  p.msg_f = nn::LstmCell::create(b, "msg_f", 2 * h, h);
  p.upd_l2 = nn::LstmCell::create(b, "upd_l2", h, h);
  p.upd_l3 = nn::LstmCell::create(b, "upd_l3", h, h);
  p.readout_proj = nn::LinearLayer::create(b, "readout.proj", 3 * h, h);
  p.readout = nn::SkipMlp::create(b, "readout", h, config.readout_depth);
  return p;
}

ModelParams ModelParams::from_store(const ModelConfig& config, ParamStore store) {
  ModelParams p = create(config, 0);
  if (store.size() != p.store.size()) {
    throw DimensionError("checkpoint has " + std::to_string(store.size()) + " parameters, model " +
                         variant_name(config.readout_depth) + " expects " + std::to_string(p.store.size()));
  }
  for (ParamId id = 0; id < store.size(); ++id) {
    if (store.name(id) != p.store.name(id)) {
      throw DimensionError("parameter " + std::to_string(id) + " is '" + store.name(id) + "', expected '" +
                           p.store.name(id) + "'");
    }
    if (store.value(id).shape() != p.store.value(id).shape()) {
      throw DimensionError("parameter '" + store.name(id) + "' has extents " + shape_string(store.value(id).shape()) +
                           ", expected " + shape_string(p.store.value(id).shape()));
    }
  }
  p.store = std::move(store);
  return p;
}

SamplePlan::SamplePlan(const NetworkSample& sample) {
  check_sample(sample);
  flow_count = sample.flows.size();
  l2_count = sample.l2_features.size();
  l3_count = sample.l3_features.size();

  std::size_t max_len = 0;
  for (const Flow& f : sample.flows) max_len = std::max(max_len, f.path.size());
  steps.resize(max_len);
  for (std::size_t t = 0; t < max_len; ++t) {
    HopStep& step = steps[t];
    for (std::size_t f = 0; f < flow_count; ++f) {
      const auto& path = sample.flows[f].path;
      if (path.size() <= t) continue;
      step.flows.push_back(f);
      step.l2.push_back(path[t].l2);
      step.l3.push_back(path[t].l3);
    }
    step.all_flows = step.flows.size() == flow_count;
    message_l2.insert(message_l2.end(), step.l2.begin(), step.l2.end());
  }

  std::set<Hop> pairs;
  for (std::size_t f = 0; f < flow_count; ++f) {
    const auto& path = sample.flows[f].path;
    for (const Hop& hop : path) {
      pairs.insert(hop);
      hop_flow.push_back(f);
      hop_l2.push_back(hop.l2);
      hop_l3.push_back(hop.l3);
    }
    inv_path_len.push_back(1.0 / static_cast<double>(path.size()));
  }
  for (const Hop& hop : pairs) {
    pair_l2.push_back(hop.l2);
    pair_l3.push_back(hop.l3);
  }
}

namespace {

constexpr std::size_t kUnused = static_cast<std::size_t>(-1);

Var feature_matrix(Graph& g, const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  flat.reserve(rows.size() * rows.front().size());
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return g.constant(Tensor::matrix(rows.size(), rows.front().size(), std::move(flat)));
}

Var zeros(Graph& g, std::size_t rows, std::size_t cols) { return g.constant(Tensor({rows, cols})); }

// Row-wise mean of link states over each flow's path, [flows x hidden].
Var path_mean(Graph& g, Var states, const std::vector<std::size_t>& hop_links, const SamplePlan& plan,
              std::size_t hidden) {
  Var summed = segment_sum(gather_rows(states, hop_links), plan.hop_flow, plan.flow_count);
  Tensor weights({plan.flow_count, hidden});
  for (std::size_t f = 0; f < plan.flow_count; ++f) {
    std::fill_n(weights.raw() + f * hidden, hidden, plan.inv_path_len[f]);
  }
  return mul(summed, g.constant(std::move(weights)));
}

}  // namespace

HiddenStates extract_features(Graph& g, const ModelParams& params, const NetworkSample& sample) {
  check_sample(sample);
  const std::size_t h = params.config.hidden;
  std::vector<std::vector<double>> flow_rows;
  flow_rows.reserve(sample.flows.size());
  for (const Flow& f : sample.flows) flow_rows.push_back(f.features);

  HiddenStates s;
  s.h_f = nn::ae_encode(g, params.ae_f, feature_matrix(g, flow_rows));
  s.h_l2 = nn::ae_encode(g, params.ae_l2, feature_matrix(g, sample.l2_features));
  s.h_l3 = nn::ae_encode(g, params.ae_l3, feature_matrix(g, sample.l3_features));
  s.c_f = zeros(g, sample.flows.size(), h);
  s.c_l2 = zeros(g, sample.l2_features.size(), h);
  s.c_l3 = zeros(g, sample.l3_features.size(), h);
  return s;
}

HiddenStates message_passing_round(Graph& g, const ModelParams& params, const SamplePlan& plan,
                                   const HiddenStates& states) {
  // Flows: run the message LSTM hop by hop; every hop's hidden output is
  // that flow's message to the hop's L2 link.
  Var h_f = states.h_f;
  Var c_f = states.c_f;
  std::vector<Var> messages;
  messages.reserve(plan.steps.size());
  for (const auto& step : plan.steps) {
    Var x = concat({gather_rows(states.h_l2, step.l2), gather_rows(states.h_l3, step.l3)}, 1);
    if (step.all_flows) {
      nn::LstmState next = nn::lstm_step(g, params.msg_f, h_f, c_f, x);
      h_f = next.h;
      c_f = next.c;
      messages.push_back(next.h);
    } else {
      nn::LstmState next =
          nn::lstm_step(g, params.msg_f, gather_rows(h_f, step.flows), gather_rows(c_f, step.flows), x);
      h_f = scatter_rows(h_f, step.flows, next.h);
      c_f = scatter_rows(c_f, step.flows, next.c);
      messages.push_back(next.h);
    }
  }

  HiddenStates next;
  next.h_f = h_f;
  next.c_f = c_f;

  // L2 links: one update from the sum of all flow messages they carried.
  Var all_messages = messages.size() == 1 ? messages.front() : concat(messages, 0);
  Var l2_in = segment_sum(all_messages, plan.message_l2, plan.l2_count);
  nn::LstmState l2 = nn::lstm_step(g, params.upd_l2, states.h_l2, states.c_l2, l2_in);
  next.h_l2 = l2.h;
  next.c_l2 = l2.c;

  // L3 links: sum of the fresh states of the L2 links they were paired with.
  Var l3_in = segment_sum(gather_rows(l2.h, plan.pair_l2), plan.pair_l3, plan.l3_count);
  nn::LstmState l3 = nn::lstm_step(g, params.upd_l3, states.h_l3, states.c_l3, l3_in);
  next.h_l3 = l3.h;
  next.c_l3 = l3.c;
  return next;
}

HiddenStates message_passing_round(Graph& g, const ModelParams& params, const NetworkSample& sample,
                                   const HiddenStates& states) {
  return message_passing_round(g, params, SamplePlan(sample), states);
}

NetworkSample restrict_to_paths(const NetworkSample& sample) {
  check_sample(sample);
  std::vector<std::size_t> l2_map(sample.l2_features.size(), kUnused);
  std::vector<std::size_t> l3_map(sample.l3_features.size(), kUnused);
  for (const Flow& f : sample.flows) {
    for (const Hop& hop : f.path) {
      l2_map[hop.l2] = 0;
      l3_map[hop.l3] = 0;
    }
  }
  NetworkSample out;
  for (std::size_t i = 0; i < l2_map.size(); ++i) {
    if (l2_map[i] == kUnused) continue;
    l2_map[i] = out.l2_features.size();
    out.l2_features.push_back(sample.l2_features[i]);
  }
  for (std::size_t i = 0; i < l3_map.size(); ++i) {
    if (l3_map[i] == kUnused) continue;
    l3_map[i] = out.l3_features.size();
    out.l3_features.push_back(sample.l3_features[i]);
  }
  out.flows = sample.flows;
  for (Flow& f : out.flows) {
    for (Hop& hop : f.path) hop = Hop{l2_map[hop.l2], l3_map[hop.l3]};
  }
  return out;
}

Var readout(Graph& g, const ModelParams& params, const SamplePlan& plan, const HiddenStates& states) {
  const std::size_t h = params.config.hidden;
  Var pooled = concat({states.h_f, path_mean(g, states.h_l2, plan.hop_l2, plan, h),
                       path_mean(g, states.h_l3, plan.hop_l3, plan, h)},
                      1);
  Var x_p = params.readout_proj.forward(g, pooled);
  Var y = nn::skip_forward(g, params.readout, x_p);
  return reshape(y, {plan.flow_count});
}

Var forward(Graph& g, const ModelParams& params, const NetworkSample& sample) {
  const NetworkSample compact = restrict_to_paths(sample);
  const SamplePlan plan(compact);
  HiddenStates states = extract_features(g, params, compact);
  for (std::size_t k = 0; k < params.config.iterations; ++k) {
    states = message_passing_round(g, params, plan, states);
  }
  return readout(g, params, plan, states);
}

std::vector<double> predict(const ModelParams& params, const NetworkSample& sample) {
  Graph g(params.store);
  Var y = forward(g, params, sample);
  const auto d = y.value().data();
  return {d.begin(), d.end()};
}

}  // namespace aesmpn::model
