// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace aesmpn::data {

struct SampleRecord;

/// How the edge-count bound (10 to 26) is read: either the file lists both
/// directions of every edge (directed count in [10, 26]), or one record per
/// bidirectional edge (distinct node pairs in [5, 13]).
enum class EdgeCount { Directed, Undirected };

struct ValidationOptions {
  /// Also enforce the measured-testbed regime: 5 to 8 nodes, the edge-count
  /// bound, capacities in {1, 10, 80} Gbps, rate and size ranges, CBR rate
  /// consistency, and contiguous src-to-dst paths.
  bool strict = false;
  EdgeCount edge_count = EdgeCount::Directed;
};

/// Problems found in one sample; empty when valid. Messages name the
/// offending flow or link.
std::vector<std::string> validate_sample(const SampleRecord& sample, const ValidationOptions& options = {});

inline constexpr double kTrafficRateMin = 8.58447072e+05;
inline constexpr double kTrafficRateMax = 3.23802572e+08;
inline constexpr double kPacketRateMin = 221.7;
inline constexpr double kPacketRateMax = 43856.35;
inline constexpr double kPacketSizeMin = 824.0;
inline constexpr double kPacketSizeMax = 11552.0;
inline constexpr double kCapacitiesGbps[] = {1.0, 10.0, 80.0};
inline constexpr std::size_t kNodesMin = 5;
inline constexpr std::size_t kNodesMax = 8;
inline constexpr std::size_t kDirectedEdgesMin = 10;
inline constexpr std::size_t kDirectedEdgesMax = 26;

}  // namespace aesmpn::data
