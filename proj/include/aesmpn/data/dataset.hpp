// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aesmpn/data/validate.hpp"
#include "aesmpn/model/sample.hpp"

// Dataset interchange: UTF-8 JSON Lines, one self-contained sample per line.
//
//   {"schema_version":1,"id":0,"nodes":5,
//    "l2_links":[{"src":0,"dst":1,"capacity_gbps":10.0},...],
//    "l3_links":[{"src":0,"dst":1,"capacity_gbps":10.0},...],
//    "flows":[{"src":0,"dst":3,"traffic_rate":1.2e6,"packet_rate":150.0,
//              "packet_size":8000.0,"flow_type":"CBR",
//              "path":[[0,0],[4,4]],"delay":1.5e-5},...]}
//
// Units: capacity Gbps, traffic_rate bits/s, packet_rate packets/s,
// packet_size bits, delay seconds. A path is a list of [l2, l3] link indices.

namespace aesmpn::data {

inline constexpr int kSchemaVersion = 1;

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FlowType { CBR, MB };

struct LinkRecord {
  std::size_t src = 0;
  std::size_t dst = 0;
  double capacity_gbps = 0.0;
  friend bool operator==(const LinkRecord&, const LinkRecord&) = default;
};

struct FlowRecord {
  std::size_t src = 0;
  std::size_t dst = 0;
  double traffic_rate = 0.0;  // bits/s
  double packet_rate = 0.0;   // packets/s
  double packet_size = 0.0;   // bits
  FlowType type = FlowType::CBR;
  std::vector<model::Hop> path;
  double delay = 0.0;  // seconds
  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

struct SampleRecord {
  std::uint64_t id = 0;
  std::size_t nodes = 0;
  std::vector<LinkRecord> l2_links;
  std::vector<LinkRecord> l3_links;
  std::vector<FlowRecord> flows;
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct LoadResult {
  std::vector<SampleRecord> samples;
  std::vector<std::string> warnings;
};

std::string serialize_sample(const SampleRecord& sample);
SampleRecord parse_sample(const std::string& line);

/// Parses and validates every line. All malformed or invalid lines are
/// collected into one DataError, each prefixed with its line number.
LoadResult read_dataset(std::istream& in, const ValidationOptions& options = {});
LoadResult load_dataset(const std::filesystem::path& path, const ValidationOptions& options = {});

void write_dataset(std::ostream& out, std::span<const SampleRecord> samples);
/// Writes to a temporary sibling and renames it into place.
void save_dataset(const std::filesystem::path& path, std::span<const SampleRecord> samples);

std::string to_string(FlowType type);
FlowType parse_flow_type(const std::string& text);

}  // namespace aesmpn::data
