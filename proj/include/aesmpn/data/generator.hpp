// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aesmpn/data/dataset.hpp"

namespace aesmpn::data {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Synthetic dataset: random connected topologies, shortest-path routed
/// flows, and M/M/1 per-link sojourn times as delay targets.
struct GeneratorConfig {
  std::size_t samples = 200;
  std::size_t nodes_min = kNodesMin;
  std::size_t nodes_max = kNodesMax;
  std::size_t directed_edges_min = kDirectedEdgesMin;
  std::size_t directed_edges_max = kDirectedEdgesMax;
  std::vector<double> capacities_gbps{1.0, 10.0, 80.0};
  std::size_t flows_min = 6;
  std::size_t flows_max = 12;
  double rho_max = 0.9;  // every link keeps lambda < rho_max * mu
  std::size_t max_retries = 200;
  std::uint64_t seed = 1;

  /// Throws GenerationError when a field is out of its domain.
  void validate() const;
};

std::vector<SampleRecord> generate_synthetic(const GeneratorConfig& config);
/// Sample `index` of the dataset; depends only on (config, index).
SampleRecord generate_sample(const GeneratorConfig& config, std::uint64_t index);

/// Per-L3-link M/M/1 quantities for the flows currently routed in a sample.
/// mu = capacity / mean packet size, the mean being carried bits over carried
/// packets; lambda = sum of packet rates; sojourn = 1 / (mu - lambda). Links
/// without flows have lambda = 0 and mu from the sample-wide mean packet size.
struct LinkQueue {
  double mu = 0.0;
  double lambda = 0.0;
  double sojourn = 0.0;
};
std::vector<LinkQueue> mm1_link_queues(const SampleRecord& sample);

/// Recomputes every flow's delay as the sum of sojourn times along its path.
/// Throws GenerationError if a loaded link is unstable (lambda >= mu).
void assign_mm1_delays(SampleRecord& sample);

/// Hop-count shortest path from src to dst over the sample's L3 links,
/// breaking ties towards lower node ids. Returned as L3 link indices.
std::vector<std::size_t> shortest_path(const SampleRecord& sample, std::size_t src, std::size_t dst);

}  // namespace aesmpn::data
