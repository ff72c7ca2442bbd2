// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/data/normalize.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace aesmpn::data {

using json = nlohmann::ordered_json;

namespace {

void check_range(const Range& r, const char* name) {
  if (!(std::isfinite(r.min) && std::isfinite(r.max) && r.max > r.min)) {
    throw DataError(std::string("normalization range for ") + name + " needs max > min");
  }
}

double scaled(double v, const Range& r, const char* name, bool strict) {
  if (strict && (v < r.min || v > r.max)) {
    throw DataError(std::string(name) + " " + std::to_string(v) + " outside [" + std::to_string(r.min) + ", " +
                    std::to_string(r.max) + "]");
  }
  return normalize_value(v, r);
}

json range_json(const Range& r) { return json{{"min", r.min}, {"max", r.max}}; }

Range range_from(const json& j, const char* key, const Range& fallback) {
  if (!j.contains(key)) return fallback;
  return Range{j.at(key).at("min").get<double>(), j.at(key).at("max").get<double>()};
}

}  // namespace

void NormalizationSpec::validate() const {
  check_range(traffic_rate, "traffic_rate");
  check_range(packet_rate, "packet_rate");
  check_range(packet_size, "packet_size");
  check_range(capacity_gbps, "capacity_gbps");
  if (!(std::isfinite(delay_scale) && delay_scale > 0.0)) throw DataError("delay_scale must be positive");
}

double normalize_value(double v, const Range& r) { return (v - r.min) / (r.max - r.min); }

double denormalize_value(double v, const Range& r) { return r.min + v * (r.max - r.min); }

std::vector<double> normalize_flow(const FlowRecord& flow, const NormalizationSpec& spec, bool strict) {
  return {scaled(flow.traffic_rate, spec.traffic_rate, "traffic_rate", strict),
          scaled(flow.packet_rate, spec.packet_rate, "packet_rate", strict),
          scaled(flow.packet_size, spec.packet_size, "packet_size", strict),
          flow.type == FlowType::CBR ? 1.0 : 0.0,
          flow.type == FlowType::MB ? 1.0 : 0.0};
}

std::vector<double> normalize_link(const LinkRecord& link, const NormalizationSpec& spec, bool strict) {
  return {scaled(link.capacity_gbps, spec.capacity_gbps, "capacity_gbps", strict)};
}

FlowFeatures denormalize_flow(std::span<const double> features, const NormalizationSpec& spec) {
  if (features.size() != kFlowFeatureWidth) throw DataError("flow feature vector must have 5 entries");
  return FlowFeatures{denormalize_value(features[0], spec.traffic_rate),
                      denormalize_value(features[1], spec.packet_rate),
                      denormalize_value(features[2], spec.packet_size),
                      features[3] >= features[4] ? FlowType::CBR : FlowType::MB};
}

double denormalize_link_capacity(std::span<const double> features, const NormalizationSpec& spec) {
  if (features.size() != kLinkFeatureWidth) throw DataError("link feature vector must have 1 entry");
  return denormalize_value(features[0], spec.capacity_gbps);
}

model::NetworkSample to_network_sample(const SampleRecord& sample, const NormalizationSpec& spec, bool strict) {
  model::NetworkSample out;
  out.l2_features.reserve(sample.l2_links.size());
  for (const auto& l : sample.l2_links) out.l2_features.push_back(normalize_link(l, spec, strict));
  out.l3_features.reserve(sample.l3_links.size());
  for (const auto& l : sample.l3_links) out.l3_features.push_back(normalize_link(l, spec, strict));
  out.flows.reserve(sample.flows.size());
  for (const auto& f : sample.flows) {
    out.flows.push_back(model::Flow{normalize_flow(f, spec, strict), f.path, normalize_delay(f.delay, spec)});
  }
  return out;
}

std::string serialize_spec(const NormalizationSpec& spec) {
  json j;
  j["traffic_rate"] = range_json(spec.traffic_rate);
  j["packet_rate"] = range_json(spec.packet_rate);
  j["packet_size"] = range_json(spec.packet_size);
  j["capacity_gbps"] = range_json(spec.capacity_gbps);
  j["delay_scale"] = spec.delay_scale;
  return j.dump(2);
}

NormalizationSpec parse_spec(const std::string& text) {
  NormalizationSpec spec;
  try {
    const json j = json::parse(text);
    spec.traffic_rate = range_from(j, "traffic_rate", spec.traffic_rate);
    spec.packet_rate = range_from(j, "packet_rate", spec.packet_rate);
    spec.packet_size = range_from(j, "packet_size", spec.packet_size);
    spec.capacity_gbps = range_from(j, "capacity_gbps", spec.capacity_gbps);
    if (j.contains("delay_scale")) spec.delay_scale = j.at("delay_scale").get<double>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad normalization spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

NormalizationSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open normalization spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

}  // namespace aesmpn::data
