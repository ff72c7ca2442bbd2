// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aesmpn/data/dataset.hpp"
#include "aesmpn/numerics/random.hpp"

namespace aesmpn::data {

SplitIndices split_indices(std::size_t n, const std::array<double, 3>& fractions, std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw DataError("split fractions must be positive");
    total += f;
  }
  if (total > 1.0 + 1e-12) throw DataError("split fractions sum to more than 1");
  if (n < fractions.size()) {
    throw DataError("cannot split " + std::to_string(n) + " samples into " + std::to_string(fractions.size()) +
                    " non-empty parts");
  }

  std::array<std::size_t, 3> sizes{};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    sizes[i] = static_cast<std::size_t>(std::floor(fractions[i] * static_cast<double>(n) + 1e-9));
  }
  std::size_t spare = n - (sizes[0] + sizes[1] + sizes[2]);
  for (auto& s : sizes) {
    if (s != 0) continue;
    if (spare > 0) {
      --spare;
    } else {
      --*std::max_element(sizes.begin(), sizes.end());
    }
    s = 1;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);

  SplitIndices out;
  auto it = order.begin();
  out.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  out.val.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  out.test.assign(it, it + static_cast<std::ptrdiff_t>(sizes[2]));
  return out;
}

}  // namespace aesmpn::data
