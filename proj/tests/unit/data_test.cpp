// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "aesmpn/data/dataset.hpp"
#include "aesmpn/data/generator.hpp"
#include "aesmpn/data/normalize.hpp"
#include "aesmpn/data/split.hpp"
#include "aesmpn/data/validate.hpp"
#include "support.hpp"

using namespace aesmpn;
using namespace aesmpn::data;

namespace {

std::vector<SampleRecord> generate(std::size_t n, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.samples = n;
  cfg.seed = seed;
  return generate_synthetic(cfg);
}

SampleRecord one_link_sample() {
  SampleRecord s;
  s.nodes = 2;
  s.l2_links = {{0, 1, 10.0}};
  s.l3_links = {{0, 1, 10.0}};
  FlowRecord f;
  f.src = 0;
  f.dst = 1;
  f.packet_size = 10000.0;
  f.packet_rate = 5e5;
  f.traffic_rate = f.packet_size * f.packet_rate;
  f.path = {{0, 0}};
  s.flows.push_back(f);
  return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_SUITE("data") {

TEST_CASE("dataset round trip is field-for-field") {
  const auto samples = generate(6, 3);
  std::stringstream ss;
  write_dataset(ss, samples);
  const LoadResult back = read_dataset(ss);
  CHECK(back.warnings.empty());
  CHECK(back.samples == samples);
  for (const auto& s : samples) CHECK(parse_sample(serialize_sample(s)) == s);

  const auto dir = testing::scratch_dir("dataset");
  save_dataset(dir / "d.jsonl", samples);
  CHECK(load_dataset(dir / "d.jsonl").samples == samples);
}

TEST_CASE("empty dataset loads with a warning") {
  std::istringstream in("");
  const LoadResult r = read_dataset(in);
  CHECK(r.samples.empty());
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("out-of-range path is reported with the flow") {
  auto s = generate(1, 4).front();
  s.flows[2].path[0].l3 = 1000;
  const auto problems = validate_sample(s);
  REQUIRE_FALSE(problems.empty());
  CHECK(problems.front().find("flow 2") != std::string::npos);
  std::istringstream in(serialize_sample(s) + "\n");
  try {
    read_dataset(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    CHECK(std::string(e.what()).find("flow 2") != std::string::npos);
  }
}

TEST_CASE("malformed lines are rejected") {
  CHECK_THROWS_AS(parse_sample("{not json"), DataError);
  CHECK_THROWS_AS(parse_sample(R"({"id":0})"), DataError);
  CHECK_THROWS_AS(parse_sample(R"({"schema_version":2,"id":0})"), DataError);
  CHECK_THROWS_AS(parse_flow_type("VBR"), DataError);
  CHECK(parse_flow_type("MB") == FlowType::MB);
}

TEST_CASE("normalization examples") {
  const NormalizationSpec spec;
  CHECK(normalize_value(824.0, spec.packet_size) == 0.0);
  CHECK(normalize_value(11552.0, spec.packet_size) == 1.0);
  CHECK(normalize_value(1.0, spec.capacity_gbps) == 0.0);
  CHECK(normalize_value(80.0, spec.capacity_gbps) == 1.0);
  CHECK(normalize_link({0, 1, 1.0}, spec) == std::vector<double>{0.0});
  CHECK_THROWS_AS(normalize_link({0, 1, 100.0}, spec, true), DataError);
  CHECK_NOTHROW(normalize_link({0, 1, 100.0}, spec, false));
}

TEST_CASE("normalization is bijective on the declared ranges") {
  const NormalizationSpec spec;
  std::mt19937_64 rng(5);
  for (const Range& r : {spec.traffic_rate, spec.packet_rate, spec.packet_size, spec.capacity_gbps}) {
    std::uniform_real_distribution<double> u(r.min, r.max);
    for (int i = 0; i < 1000; ++i) {
      const double v = u(rng);
      CHECK(rel(denormalize_value(normalize_value(v, r), r), v) <= 1e-12);
    }
  }
  for (const auto& s : generate(5, 6)) {
    for (const auto& f : s.flows) {
      const FlowFeatures back = denormalize_flow(normalize_flow(f, spec), spec);
      CHECK(rel(back.traffic_rate, f.traffic_rate) <= 1e-12);
      CHECK(rel(back.packet_rate, f.packet_rate) <= 1e-12);
      CHECK(rel(back.packet_size, f.packet_size) <= 1e-12);
      CHECK(back.type == f.type);
    }
    for (const auto& l : s.l3_links) {
      CHECK(rel(denormalize_link_capacity(normalize_link(l, spec), spec), l.capacity_gbps) <= 1e-12);
    }
  }
  CHECK(denormalize_delay(normalize_delay(3.7e-6, spec), spec) == doctest::Approx(3.7e-6).epsilon(1e-15));
}

TEST_CASE("normalization spec round trip and validation") {
  NormalizationSpec spec;
  spec.delay_scale = 2e-6;
  spec.packet_size = {100.0, 200.0};
  CHECK(parse_spec(serialize_spec(spec)) == spec);
  NormalizationSpec bad;
  bad.capacity_gbps = {5.0, 5.0};
  CHECK_THROWS(bad.validate());
  CHECK_THROWS(parse_spec(R"({"delay_scale": -1})"));
}

TEST_CASE("to_network_sample carries features, paths and targets") {
  const auto rec = generate(1, 7).front();
  const NormalizationSpec spec;
  const model::NetworkSample s = to_network_sample(rec, spec);
  REQUIRE(s.flows.size() == rec.flows.size());
  CHECK(s.l2_features.size() == rec.l2_links.size());
  CHECK(s.l3_features.size() == rec.l3_links.size());
  for (std::size_t i = 0; i < s.flows.size(); ++i) {
    CHECK(s.flows[i].path == rec.flows[i].path);
    CHECK(s.flows[i].target == rec.flows[i].delay / spec.delay_scale);
    CHECK(s.flows[i].features.size() == kFlowFeatureWidth);
  }
}

TEST_CASE("m/m/1 closed form on one link") {
  SampleRecord s = one_link_sample();
  const auto q = mm1_link_queues(s);
  REQUIRE(q.size() == 1);
  CHECK(q[0].mu == 1e6);
  CHECK(q[0].lambda == 5e5);
  assign_mm1_delays(s);
  CHECK(rel(s.flows[0].delay, 2e-6) <= 1e-12);

  s.flows[0].packet_rate = 1e-3;
  s.flows[0].traffic_rate = 10.0;
  assign_mm1_delays(s);
  CHECK(rel(s.flows[0].delay, 1.0 / 1e6) <= 1e-8);

  s.flows[0].packet_rate = 1e6;
  s.flows[0].traffic_rate = 1e10;
  CHECK_THROWS_AS(assign_mm1_delays(s), GenerationError);
}

TEST_CASE("generated delays equal the summed sojourn times") {
  for (const auto& s : generate(20, 8)) {
    const auto q = mm1_link_queues(s);
    for (const auto& l : q) CHECK(l.lambda < l.mu);
    for (const auto& f : s.flows) {
      double w = 0.0;
      for (const auto& hop : f.path) w += 1.0 / (q[hop.l3].mu - q[hop.l3].lambda);
      CHECK(f.delay > 0.0);
      CHECK(rel(f.delay, w) <= 1e-12);
    }
  }
}

TEST_CASE("more load on a path link strictly increases the flow delay") {
  std::mt19937_64 rng(9);
  for (auto s : generate(20, 10)) {
    const std::size_t fi = rng() % s.flows.size();
    const FlowRecord target = s.flows[fi];
    const model::Hop hop = target.path[rng() % target.path.size()];
    const auto q = mm1_link_queues(s);
    double rate = 0.0, bits = 0.0;
    for (const auto& f : s.flows) {
      for (const auto& h : f.path) {
        if (h.l3 == hop.l3) {
          rate += f.packet_rate;
          bits += f.traffic_rate;
        }
      }
    }
    // A single-hop flow with the link's mean packet size leaves mu unchanged.
    FlowRecord extra;
    extra.src = s.l3_links[hop.l3].src;
    extra.dst = s.l3_links[hop.l3].dst;
    extra.packet_size = bits / rate;
    extra.packet_rate = 0.25 * (q[hop.l3].mu - q[hop.l3].lambda);
    extra.traffic_rate = extra.packet_rate * extra.packet_size;
    extra.path = {hop};
    SampleRecord more = s;
    more.flows.push_back(extra);
    assign_mm1_delays(more);
    CHECK(more.flows[fi].delay > s.flows[fi].delay);
  }
}

TEST_CASE("generator is deterministic and agrees with the validator") {
  const auto a = generate(15, 11);
  const auto b = generate(15, 11);
  CHECK(a == b);
  CHECK(a != generate(15, 12));
  std::stringstream sa, sb;
  write_dataset(sa, a);
  write_dataset(sb, b);
  CHECK(sa.str() == sb.str());
  GeneratorConfig cfg;
  cfg.seed = 11;
  CHECK(generate_sample(cfg, 3) == a[3]);
  for (const auto& s : a) {
    CHECK(validate_sample(s).empty());
    ValidationOptions strict;
    strict.strict = true;
    CHECK(validate_sample(s, strict).empty());
    CHECK(s.nodes >= kNodesMin);
    CHECK(s.nodes <= kNodesMax);
    CHECK(s.l3_links.size() >= kDirectedEdgesMin);
    CHECK(s.l3_links.size() <= kDirectedEdgesMax);
    CHECK(s.l2_links.size() == s.l3_links.size());
  }
}

TEST_CASE("edge count can be read as undirected pairs") {
  SampleRecord ring;
  ring.nodes = 5;
  for (std::size_t v = 0; v < 5; ++v) ring.l3_links.push_back({v, (v + 1) % 5, 10.0});
  ring.l2_links = ring.l3_links;
  FlowRecord f;
  f.src = 0;
  f.dst = 1;
  f.packet_size = 8000.0;
  f.packet_rate = 1000.0;
  f.traffic_rate = 8e6;
  f.path = {{0, 0}};
  f.delay = 1e-6;
  ring.flows.push_back(f);
  ValidationOptions strict;
  strict.strict = true;
  const auto directed = validate_sample(ring, strict);
  REQUIRE(directed.size() == 1);
  CHECK(directed.front().find("directed edge count 5") != std::string::npos);
  strict.edge_count = EdgeCount::Undirected;
  CHECK(validate_sample(ring, strict).empty());
  for (const auto& s : generate(5, 13)) CHECK(validate_sample(s, strict).empty());
}

TEST_CASE("shortest paths break ties towards lower node ids") {
  SampleRecord s;
  s.nodes = 4;
  // Square 0-1-3 and 0-2-3, both two hops.
  for (auto [a, b] : {std::pair{0, 1}, {1, 3}, {0, 2}, {2, 3}}) {
    s.l3_links.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b), 10.0});
    s.l3_links.push_back({static_cast<std::size_t>(b), static_cast<std::size_t>(a), 10.0});
  }
  const auto path = shortest_path(s, 0, 3);
  REQUIRE(path.size() == 2);
  CHECK(s.l3_links[path[0]].dst == 1);
  CHECK(s.l3_links[path[1]].dst == 3);
}

TEST_CASE("generator config validation") {
  GeneratorConfig cfg;
  cfg.rho_max = 1.5;
  CHECK_THROWS_AS(cfg.validate(), GenerationError);
  cfg = {};
  cfg.nodes_min = 9;
  CHECK_THROWS_AS(cfg.validate(), GenerationError);
  cfg = {};
  cfg.samples = 0;
  CHECK(generate_synthetic(cfg).empty());
}

TEST_CASE("split sizes, membership and disjointness") {
  const SplitIndices s = split_indices(10, {0.8, 0.1, 0.1}, 1);
  CHECK(s.train.size() == 8);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 1);
  const SplitIndices again = split_indices(10, {0.8, 0.1, 0.1}, 1);
  CHECK(again.train == s.train);
  CHECK(again.val == s.val);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng() % 300;
    const SplitIndices r = split_indices(n, {0.6, 0.2, 0.2}, rng());
    std::set<std::size_t> all;
    for (const auto* part : {&r.train, &r.val, &r.test}) {
      CHECK_FALSE(part->empty());
      all.insert(part->begin(), part->end());
    }
    CHECK(all.size() == r.train.size() + r.val.size() + r.test.size());
    CHECK(*all.rbegin() < n);
  }
  CHECK_THROWS_AS(split_indices(2, {0.8, 0.1, 0.1}, 1), DataError);
  CHECK_THROWS_AS(split_indices(10, {0.8, 0.3, 0.1}, 1), DataError);
  CHECK_THROWS_AS(split_indices(10, {0.8, 0.0, 0.1}, 1), DataError);
  const std::vector<int> items{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto parts = split_dataset(items, {0.8, 0.1, 0.1}, 1);
  CHECK(parts.train.size() == 8);
}

}  // TEST_SUITE
