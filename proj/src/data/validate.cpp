// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/data/validate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "aesmpn/data/dataset.hpp"

namespace aesmpn::data {
namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

bool known_capacity(double c) {
  return std::any_of(std::begin(kCapacitiesGbps), std::end(kCapacitiesGbps),
                     [c](double k) { return std::fabs(c - k) <= 1e-9 * k; });
}

void check_links(const std::vector<LinkRecord>& links, const char* kind, const SampleRecord& s, bool strict,
                 std::vector<std::string>& out) {
  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkRecord& l = links[i];
    const std::string name = std::string(kind) + " link " + std::to_string(i);
    if (l.src >= s.nodes || l.dst >= s.nodes) out.push_back(name + ": endpoint outside 0.." + std::to_string(s.nodes - 1));
    if (l.src == l.dst) out.push_back(name + ": self loop");
    if (!positive_finite(l.capacity_gbps)) {
      out.push_back(name + ": capacity must be positive");
    } else if (strict && !known_capacity(l.capacity_gbps)) {
      out.push_back(name + ": capacity " + std::to_string(l.capacity_gbps) + " Gbps not in {1, 10, 80}");
    }
  }
}

}  // namespace

std::vector<std::string> validate_sample(const SampleRecord& s, const ValidationOptions& options) {
  std::vector<std::string> out;
  if (s.nodes == 0) out.push_back("sample has no nodes");
  if (s.l2_links.empty()) out.push_back("sample has no l2 links");
  if (s.l3_links.empty()) out.push_back("sample has no l3 links");
  if (s.flows.empty()) out.push_back("sample has no flows");
  check_links(s.l2_links, "l2", s, options.strict, out);
  check_links(s.l3_links, "l3", s, options.strict, out);

  for (std::size_t f = 0; f < s.flows.size(); ++f) {
    const FlowRecord& flow = s.flows[f];
    const std::string name = "flow " + std::to_string(f);
    if (flow.path.empty()) out.push_back(name + ": empty path");
    bool indices_ok = true;
    for (std::size_t h = 0; h < flow.path.size(); ++h) {
      const auto& hop = flow.path[h];
      if (hop.l2 >= s.l2_links.size() || hop.l3 >= s.l3_links.size()) {
        indices_ok = false;
        out.push_back(name + ": hop " + std::to_string(h) + " index (" + std::to_string(hop.l2) + "," +
                      std::to_string(hop.l3) + ") out of range");
      }
    }
    if (!positive_finite(flow.traffic_rate) || !positive_finite(flow.packet_rate) ||
        !positive_finite(flow.packet_size)) {
      out.push_back(name + ": rates and packet size must be positive");
    }
    if (!positive_finite(flow.delay)) out.push_back(name + ": target delay must be positive");
    if (flow.src >= s.nodes || flow.dst >= s.nodes) out.push_back(name + ": endpoint outside node range");

    if (!options.strict) continue;
    if (!in_range(flow.traffic_rate, kTrafficRateMin, kTrafficRateMax)) out.push_back(name + ": traffic_rate out of range");
    if (!in_range(flow.packet_rate, kPacketRateMin, kPacketRateMax)) out.push_back(name + ": packet_rate out of range");
    if (!in_range(flow.packet_size, kPacketSizeMin, kPacketSizeMax)) out.push_back(name + ": packet_size out of range");
    if (flow.type == FlowType::CBR &&
        std::fabs(flow.traffic_rate - flow.packet_rate * flow.packet_size) > 0.01 * flow.traffic_rate) {
      out.push_back(name + ": CBR traffic_rate differs from packet_rate x packet_size by more than 1%");
    }
    if (indices_ok && !flow.path.empty()) {
      std::size_t at = flow.src;
      bool contiguous = true;
      for (const auto& hop : flow.path) {
        const LinkRecord& l3 = s.l3_links[hop.l3];
        if (l3.src != at) {
          out.push_back(name + ": path is not contiguous at l3 link " + std::to_string(hop.l3));
          contiguous = false;
          break;
        }
        at = l3.dst;
      }
      if (contiguous && at != flow.dst) out.push_back(name + ": path does not end at dst");
    }
  }

  if (options.strict) {
    if (s.nodes < kNodesMin || s.nodes > kNodesMax) {
      out.push_back("node count " + std::to_string(s.nodes) + " outside 5..8");
    }
    if (options.edge_count == EdgeCount::Directed) {
      const std::size_t n = s.l3_links.size();
      if (n < kDirectedEdgesMin || n > kDirectedEdgesMax) {
        out.push_back("directed edge count " + std::to_string(n) + " outside 10..26");
      }
    } else {
      std::set<std::pair<std::size_t, std::size_t>> pairs;
      for (const auto& l : s.l3_links) pairs.insert(std::minmax(l.src, l.dst));
      if (pairs.size() < kDirectedEdgesMin / 2 || pairs.size() > kDirectedEdgesMax / 2) {
        out.push_back("bidirectional edge count " + std::to_string(pairs.size()) + " outside 5..13");
      }
    }
  }
  return out;
}

}  // namespace aesmpn::data
