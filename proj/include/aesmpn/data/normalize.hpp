// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aesmpn/data/dataset.hpp"
#include "aesmpn/model/sample.hpp"

namespace aesmpn::data {

struct Range {
  double min = 0.0;
  double max = 1.0;
  friend bool operator==(const Range&, const Range&) = default;
};

/// Min-max ranges for every model input, defaulting to the measured testbed
/// ranges, plus the divisor that maps delays (seconds) to model units.
struct NormalizationSpec {
  Range traffic_rate{kTrafficRateMin, kTrafficRateMax};
  Range packet_rate{kPacketRateMin, kPacketRateMax};
  Range packet_size{kPacketSizeMin, kPacketSizeMax};
  Range capacity_gbps{1.0, 80.0};
  double delay_scale = 1e-5;

  void validate() const;
  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

/// Flow features: [traffic_rate, packet_rate, packet_size, is_cbr, is_mb].
inline constexpr std::size_t kFlowFeatureWidth = 5;
/// L2 and L3 link features: [capacity].
inline constexpr std::size_t kLinkFeatureWidth = 1;

double normalize_value(double v, const Range& r);
double denormalize_value(double v, const Range& r);

/// Throws DataError in strict mode when a value lies outside its range.
std::vector<double> normalize_flow(const FlowRecord& flow, const NormalizationSpec& spec, bool strict = false);
std::vector<double> normalize_link(const LinkRecord& link, const NormalizationSpec& spec, bool strict = false);

struct FlowFeatures {
  double traffic_rate = 0.0;
  double packet_rate = 0.0;
  double packet_size = 0.0;
  FlowType type = FlowType::CBR;
};
FlowFeatures denormalize_flow(std::span<const double> features, const NormalizationSpec& spec);
double denormalize_link_capacity(std::span<const double> features, const NormalizationSpec& spec);

inline double normalize_delay(double seconds, const NormalizationSpec& spec) { return seconds / spec.delay_scale; }
inline double denormalize_delay(double value, const NormalizationSpec& spec) { return value * spec.delay_scale; }

model::NetworkSample to_network_sample(const SampleRecord& sample, const NormalizationSpec& spec, bool strict = false);

std::string serialize_spec(const NormalizationSpec& spec);
NormalizationSpec parse_spec(const std::string& text);
NormalizationSpec load_spec(const std::filesystem::path& path);

}  // namespace aesmpn::data
