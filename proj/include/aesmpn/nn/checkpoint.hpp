// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

#include "aesmpn/numerics/param_store.hpp"

// Text checkpoint, version 1:
//
//   aesmpn-checkpoint 1
//   meta <key> <value>            (zero or more; value runs to end of line)
//   param <path> <rank> <d0> .. <count>
//   <count values, %.17g, space separated>
//   ...
//   end
//
// Parameters appear in store order. Values round-trip exactly.

namespace aesmpn::nn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  std::map<std::string, std::string> meta;
  numerics::ParamStore params;
};

inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);

/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aesmpn::nn
