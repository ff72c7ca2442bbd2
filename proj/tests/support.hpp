// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aesmpn/cli/commands.hpp"
#include "aesmpn/data/generator.hpp"
#include "aesmpn/data/normalize.hpp"
#include "aesmpn/model/sample.hpp"

namespace aesmpn::testing {

namespace fs = std::filesystem;

/// Fresh empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("aesmpn_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::vector<model::NetworkSample> generated_samples(std::size_t n, std::uint64_t seed) {
  data::GeneratorConfig cfg;
  cfg.samples = n;
  cfg.seed = seed;
  std::vector<model::NetworkSample> out;
  for (const auto& rec : data::generate_synthetic(cfg)) out.push_back(data::to_network_sample(rec, {}));
  return out;
}

/// Flow i of the result is flow order[i] of the input.
inline model::NetworkSample permute_flows(const model::NetworkSample& s, const std::vector<std::size_t>& order) {
  model::NetworkSample out = s;
  for (std::size_t i = 0; i < order.size(); ++i) out.flows[i] = s.flows[order[i]];
  return out;
}

/// Link j of the input becomes link perm[j] of the result; paths follow.
inline model::NetworkSample relabel_links(const model::NetworkSample& s, const std::vector<std::size_t>& perm_l2,
                                          const std::vector<std::size_t>& perm_l3) {
  model::NetworkSample out = s;
  for (std::size_t j = 0; j < perm_l2.size(); ++j) out.l2_features[perm_l2[j]] = s.l2_features[j];
  for (std::size_t j = 0; j < perm_l3.size(); ++j) out.l3_features[perm_l3[j]] = s.l3_features[j];
  for (auto& f : out.flows) {
    for (auto& hop : f.path) hop = {perm_l2[hop.l2], perm_l3[hop.l3]};
  }
  return out;
}

inline std::vector<std::size_t> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace aesmpn::testing
