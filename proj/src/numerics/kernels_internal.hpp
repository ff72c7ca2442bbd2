// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "aesmpn/numerics/kernels.hpp"

namespace aesmpn::numerics::kernels::detail {

const KernelTable& scalar_impl();
#if defined(AESMPN_HAVE_AVX2)
const KernelTable& avx2_impl();
#endif

}  // namespace aesmpn::numerics::kernels::detail
