// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/data/dataset.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace aesmpn::data {

using json = nlohmann::ordered_json;

std::string to_string(FlowType type) { return type == FlowType::CBR ? "CBR" : "MB"; }

FlowType parse_flow_type(const std::string& text) {
  if (text == "CBR") return FlowType::CBR;
  if (text == "MB") return FlowType::MB;
  throw DataError("unknown flow_type '" + text + "' (expected CBR or MB)");
}

namespace {

json link_json(const LinkRecord& l) { return json{{"src", l.src}, {"dst", l.dst}, {"capacity_gbps", l.capacity_gbps}}; }

LinkRecord link_from(const json& j) {
  return LinkRecord{j.at("src").get<std::size_t>(), j.at("dst").get<std::size_t>(),
                    j.at("capacity_gbps").get<double>()};
}

}  // namespace

std::string serialize_sample(const SampleRecord& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["id"] = s.id;
  j["nodes"] = s.nodes;
  j["l2_links"] = json::array();
  for (const auto& l : s.l2_links) j["l2_links"].push_back(link_json(l));
  j["l3_links"] = json::array();
  for (const auto& l : s.l3_links) j["l3_links"].push_back(link_json(l));
  j["flows"] = json::array();
  for (const auto& f : s.flows) {
    json path = json::array();
    for (const auto& hop : f.path) path.push_back(json::array({hop.l2, hop.l3}));
    j["flows"].push_back(json{{"src", f.src},
                              {"dst", f.dst},
                              {"traffic_rate", f.traffic_rate},
                              {"packet_rate", f.packet_rate},
                              {"packet_size", f.packet_size},
                              {"flow_type", to_string(f.type)},
                              {"path", std::move(path)},
                              {"delay", f.delay}});
  }
  return j.dump();
}

SampleRecord parse_sample(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!j.contains("schema_version")) throw DataError("missing schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) throw DataError("unsupported schema_version " + std::to_string(version));
    SampleRecord s;
    s.id = j.at("id").get<std::uint64_t>();
    s.nodes = j.at("nodes").get<std::size_t>();
    for (const auto& l : j.at("l2_links")) s.l2_links.push_back(link_from(l));
    for (const auto& l : j.at("l3_links")) s.l3_links.push_back(link_from(l));
    for (const auto& fj : j.at("flows")) {
      FlowRecord f;
      f.src = fj.at("src").get<std::size_t>();
      f.dst = fj.at("dst").get<std::size_t>();
      f.traffic_rate = fj.at("traffic_rate").get<double>();
      f.packet_rate = fj.at("packet_rate").get<double>();
      f.packet_size = fj.at("packet_size").get<double>();
      f.type = parse_flow_type(fj.at("flow_type").get<std::string>());
      for (const auto& hop : fj.at("path")) {
        if (!hop.is_array() || hop.size() != 2) throw DataError("path hop must be a [l2, l3] pair");
        f.path.push_back(model::Hop{hop[0].get<std::size_t>(), hop[1].get<std::size_t>()});
      }
      f.delay = fj.at("delay").get<double>();
      s.flows.push_back(std::move(f));
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("schema error: ") + e.what());
  }
}

LoadResult read_dataset(std::istream& in, const ValidationOptions& options) {
  LoadResult result;
  std::vector<std::string> errors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    try {
      SampleRecord s = parse_sample(line);
      const auto problems = validate_sample(s, options);
      if (!problems.empty()) {
        for (const auto& p : problems) errors.push_back(where + p);
        continue;
      }
      result.samples.push_back(std::move(s));
    } catch (const DataError& e) {
      errors.push_back(where + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = "dataset has " + std::to_string(errors.size()) + " problem(s):";
    for (const auto& e : errors) msg += "\n  " + e;
    throw DataError(msg);
  }
  if (result.samples.empty()) result.warnings.push_back("dataset is empty");
  return result;
}

LoadResult load_dataset(const std::filesystem::path& path, const ValidationOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return read_dataset(in, options);
}

void write_dataset(std::ostream& out, std::span<const SampleRecord> samples) {
  for (const auto& s : samples) out << serialize_sample(s) << '\n';
}

void save_dataset(const std::filesystem::path& path, std::span<const SampleRecord> samples) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    write_dataset(out, samples);
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace aesmpn::data
