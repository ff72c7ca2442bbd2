// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace aesmpn::data {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1 cut into three disjoint parts of floor(f_i * n)
/// items. A part that would be empty takes one of the leftover items, or one
/// from the largest part when none are left. Throws DataError for non-positive fractions, a sum
/// above 1, or fewer than three items.
SplitIndices split_indices(std::size_t n, const std::array<double, 3>& fractions, std::uint64_t seed);

template <typename T>
struct Split {
  std::vector<T> train;
  std::vector<T> val;
  std::vector<T> test;
};

template <typename T>
Split<T> split_dataset(const std::vector<T>& items, const std::array<double, 3>& fractions, std::uint64_t seed) {
  const SplitIndices idx = split_indices(items.size(), fractions, seed);
  Split<T> out;
  for (std::size_t i : idx.train) out.train.push_back(items[i]);
  for (std::size_t i : idx.val) out.val.push_back(items[i]);
  for (std::size_t i : idx.test) out.test.push_back(items[i]);
  return out;
}

}  // namespace aesmpn::data
