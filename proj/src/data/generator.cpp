// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/data/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <utility>

#include "aesmpn/numerics/random.hpp"

namespace aesmpn::data {

void GeneratorConfig::validate() const {
  if (nodes_min < 2 || nodes_max < nodes_min) throw GenerationError("node range must satisfy 2 <= min <= max");
  if (directed_edges_max < directed_edges_min) throw GenerationError("edge range must satisfy min <= max");
  if (capacities_gbps.empty()) throw GenerationError("no capacity choices");
  for (double c : capacities_gbps) {
    if (!(c > 0.0 && std::isfinite(c))) throw GenerationError("capacities must be positive");
  }
  if (flows_min < 1 || flows_max < flows_min) throw GenerationError("flow range must satisfy 1 <= min <= max");
  if (!(rho_max > 0.0 && rho_max < 1.0)) throw GenerationError("rho_max must lie in (0, 1)");
  if (max_retries == 0) throw GenerationError("max_retries must be positive");
}

namespace {

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Undirected edge set of a random connected graph on n nodes with m edges.
std::vector<std::pair<std::size_t, std::size_t>> random_topology(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t j = uniform_index(rng, 0, i - 1);
    edges.insert(std::minmax(order[i], order[j]));
  }
  std::vector<std::pair<std::size_t, std::size_t>> missing;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (!edges.count({a, b})) missing.emplace_back(a, b);
  std::shuffle(missing.begin(), missing.end(), rng);
  for (std::size_t i = 0; edges.size() < m && i < missing.size(); ++i) edges.insert(missing[i]);
  return {edges.begin(), edges.end()};
}

struct Rates {
  double traffic;
  double packet;
  double size;
};

// Packet size uniform over whole bytes in range; packet rate log-uniform;
// redrawn until the product is inside the traffic-rate range.
Rates draw_rates(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> bytes(static_cast<int>(kPacketSizeMin / 8), static_cast<int>(kPacketSizeMax / 8));
  std::uniform_real_distribution<double> log_rate(std::log(kPacketRateMin), std::log(kPacketRateMax));
  for (;;) {
    const double size = 8.0 * bytes(rng);
    const double packet = std::exp(log_rate(rng));
    const double traffic = packet * size;
    if (traffic >= kTrafficRateMin && traffic <= kTrafficRateMax && packet >= kPacketRateMin &&
        packet <= kPacketRateMax) {
      return {traffic, packet, size};
    }
  }
}

}  // namespace

std::vector<std::size_t> shortest_path(const SampleRecord& sample, std::size_t src, std::size_t dst) {
  const std::size_t n = sample.nodes;
  // adjacency sorted by neighbour id
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  for (std::size_t i = 0; i < sample.l3_links.size(); ++i) {
    adj[sample.l3_links[i].src].emplace_back(sample.l3_links[i].dst, i);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> via(n, kNone);
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> frontier;
  frontier.push(src);
  seen[src] = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    if (u == dst) break;
    for (const auto& [v, link] : adj[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      via[v] = link;
      frontier.push(v);
    }
  }
  if (!seen[dst]) throw GenerationError("no route from " + std::to_string(src) + " to " + std::to_string(dst));
  std::vector<std::size_t> path;
  for (std::size_t at = dst; at != src; at = sample.l3_links[via[at]].src) path.push_back(via[at]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<LinkQueue> mm1_link_queues(const SampleRecord& sample) {
  const std::size_t links = sample.l3_links.size();
  std::vector<double> bits(links, 0.0);
  std::vector<double> packets(links, 0.0);
  double all_bits = 0.0;
  double all_packets = 0.0;
  for (const auto& f : sample.flows) {
    all_bits += f.traffic_rate;
    all_packets += f.packet_rate;
    for (const auto& hop : f.path) {
      bits[hop.l3] += f.traffic_rate;
      packets[hop.l3] += f.packet_rate;
    }
  }
  const double fallback_size = all_packets > 0.0 ? all_bits / all_packets : kPacketSizeMin;
  std::vector<LinkQueue> out(links);
  for (std::size_t i = 0; i < links; ++i) {
    const double mean_size = packets[i] > 0.0 ? bits[i] / packets[i] : fallback_size;
    LinkQueue& q = out[i];
    q.mu = sample.l3_links[i].capacity_gbps * 1e9 / mean_size;
    q.lambda = packets[i];
    q.sojourn = q.lambda < q.mu ? 1.0 / (q.mu - q.lambda) : std::numeric_limits<double>::infinity();
  }
  return out;
}

void assign_mm1_delays(SampleRecord& sample) {
  const auto queues = mm1_link_queues(sample);
  for (std::size_t i = 0; i < queues.size(); ++i) {
    if (queues[i].lambda > 0.0 && !(queues[i].lambda < queues[i].mu)) {
      throw GenerationError("l3 link " + std::to_string(i) + " is unstable (lambda >= mu)");
    }
  }
  for (auto& f : sample.flows) {
    double delay = 0.0;
    for (const auto& hop : f.path) delay += queues[hop.l3].sojourn;
    f.delay = delay;
  }
}

SampleRecord generate_sample(const GeneratorConfig& config, std::uint64_t index) {
  config.validate();
  std::mt19937_64 rng = make_rng(config.seed, "generation", index);

  SampleRecord s;
  s.id = index;
  s.nodes = uniform_index(rng, config.nodes_min, config.nodes_max);
  const std::size_t n = s.nodes;
  const std::size_t complete = n * (n - 1) / 2;
  const std::size_t lo = std::min(std::max(n - 1, (config.directed_edges_min + 1) / 2), complete);
  const std::size_t hi = std::max(lo, std::min(complete, config.directed_edges_max / 2));
  const std::size_t m = uniform_index(rng, lo, hi);

  for (const auto& [a, b] : random_topology(rng, n, m)) {
    const double cap = config.capacities_gbps[uniform_index(rng, 0, config.capacities_gbps.size() - 1)];
    // Each L3 link rides its own L2 link; index i is shared.
    for (const auto& [u, v] : {std::pair{a, b}, std::pair{b, a}}) {
      s.l3_links.push_back(LinkRecord{u, v, cap});
      s.l2_links.push_back(LinkRecord{u, v, cap});
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b) pairs.emplace_back(a, b);
  std::shuffle(pairs.begin(), pairs.end(), rng);

  const std::size_t flows = uniform_index(rng, config.flows_min, config.flows_max);
  std::vector<double> load_bits(s.l3_links.size(), 0.0);
  for (std::size_t f = 0; f < flows; ++f) {
    const auto [src, dst] = pairs[f % pairs.size()];
    FlowRecord flow;
    flow.src = src;
    flow.dst = dst;
    flow.type = std::bernoulli_distribution(0.5)(rng) ? FlowType::CBR : FlowType::MB;
    for (std::size_t link : shortest_path(s, src, dst)) flow.path.push_back(model::Hop{link, link});

    // lambda < rho_max * mu  <=>  carried bits/s < rho_max * capacity
    bool placed = false;
    for (std::size_t attempt = 0; attempt < config.max_retries && !placed; ++attempt) {
      const Rates r = draw_rates(rng);
      placed = std::all_of(flow.path.begin(), flow.path.end(), [&](const model::Hop& hop) {
        return load_bits[hop.l3] + r.traffic < config.rho_max * s.l3_links[hop.l3].capacity_gbps * 1e9;
      });
      if (placed) {
        flow.traffic_rate = r.traffic;
        flow.packet_rate = r.packet;
        flow.packet_size = r.size;
      }
    }
    if (!placed) {
      throw GenerationError("cannot place flow " + std::to_string(f) + " of sample " + std::to_string(index) +
                            " below rho_max=" + std::to_string(config.rho_max) + " after " +
                            std::to_string(config.max_retries) + " attempts");
    }
    for (const auto& hop : flow.path) load_bits[hop.l3] += flow.traffic_rate;
    s.flows.push_back(std::move(flow));
  }
  assign_mm1_delays(s);
  return s;
}

std::vector<SampleRecord> generate_synthetic(const GeneratorConfig& config) {
  config.validate();
  std::vector<SampleRecord> out;
  out.reserve(config.samples);
  for (std::size_t i = 0; i < config.samples; ++i) out.push_back(generate_sample(config, i));
  return out;
}

}  // namespace aesmpn::data
