// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop kernels behind the tensor ops. Every kernel exists as a portable
// scalar reference and, on x86-64, as an AVX2/FMA variant chosen at runtime.
//
// All matrices are dense row-major. The gemm kernels accumulate into C.
// Within one backend, output row i of gemm_nn depends only on row i of A and
// on B, with the same reduction order for every row; the model relies on
// this for bit-exact invariance under entity relabeling.

namespace aesmpn::numerics::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;
  std::string_view name;

  // C[m x n] += A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // C[m x n] += A[m x k] * B[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

  void (*add)(std::size_t n, const double* a, const double* b, double* out);
  void (*sub)(std::size_t n, const double* a, const double* b, double* out);
  void (*mul)(std::size_t n, const double* a, const double* b, double* out);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);

  // One bias-corrected Adam update over n coordinates.
  // bias1 = 1 - beta1^t, bias2 = 1 - beta2^t.
  void (*adam_update)(std::size_t n, double* param, double* m, double* v, const double* grad, double lr,
                      double beta1, double beta2, double eps, double bias1, double bias2);
};

enum class Preference { Auto, Scalar, Avx2 };

const KernelTable& scalar_table();

/// The AVX2 table, or nullptr when it was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// Currently selected table. Defaults to the best one the CPU supports.
const KernelTable& active();

/// Switches the active table. Requesting Avx2 on a machine without it throws.
void select(Preference preference);

Preference parse_preference(std::string_view text);

}  // namespace aesmpn::numerics::kernels
