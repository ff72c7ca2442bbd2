// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/numerics/kernels.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace aesmpn::numerics::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(AESMPN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best_table() {
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{best_table()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() { return detail::scalar_impl(); }

const KernelTable* avx2_table() {
#if defined(AESMPN_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &detail::avx2_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Preference preference) {
  const KernelTable* table = nullptr;
  switch (preference) {
    case Preference::Auto:
      table = best_table();
      break;
    case Preference::Scalar:
      table = &scalar_table();
      break;
    case Preference::Avx2:
      table = avx2_table();
      if (table == nullptr) throw std::runtime_error("AVX2/FMA kernels are not available on this machine");
      break;
  }
  current().store(table, std::memory_order_release);
}

Preference parse_preference(std::string_view text) {
  if (text == "auto") return Preference::Auto;
  if (text == "scalar") return Preference::Scalar;
  if (text == "avx2") return Preference::Avx2;
  throw std::invalid_argument("unknown kernel backend '" + std::string(text) + "' (expected auto, scalar or avx2)");
}

}  // namespace aesmpn::numerics::kernels
