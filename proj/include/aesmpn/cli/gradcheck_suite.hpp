// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace aesmpn::cli {

struct GradSuiteOptions {
  double eps = 1e-5;         // ops and layers
  double e2e_eps = 1e-4;     // full model forward
  double tolerance = 1e-4;
  double e2e_tolerance = 1e-3;
  std::uint64_t seed = 1;
};

struct GradCheckEntry {
  std::string group;  // "op", "layer" or "model"
  std::string name;
  double eps = 0.0;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;

  bool passed() const { return max_rel_error < tolerance; }
};

/// Central-difference checks of every differentiable op, every layer, and
/// the full model on a two-flow, two-link sample with two rounds.
std::vector<GradCheckEntry> run_gradcheck_suite(const GradSuiteOptions& options);

}  // namespace aesmpn::cli
