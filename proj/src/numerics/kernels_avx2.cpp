// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 -mfma. Only raw-pointer loops live here so no inline
// library code gets instantiated with AVX2 encodings.
#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace aesmpn::numerics::kernels::detail {
namespace {

// R rows of C at once. Each C element is an fma chain over p = 0..k-1 in
// ascending order regardless of R, so row results do not depend on blocking.
template <int R>
inline void gemm_nn_rows(std::size_t n, std::size_t ld, std::size_t k, const double* a, const double* b, double* c) {
  std::size_t j = 0;
  if constexpr (R == 1) {
    // a single row has too few independent chains at 8 columns
    for (; j + 32 <= n; j += 32) {
      __m256d acc[8];
      for (int q = 0; q < 8; ++q) acc[q] = _mm256_loadu_pd(c + j + 4 * q);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_broadcast_sd(a + p);
        const double* brow = b + p * ld + j;
        for (int q = 0; q < 8; ++q) acc[q] = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4 * q), acc[q]);
      }
      for (int q = 0; q < 8; ++q) _mm256_storeu_pd(c + j + 4 * q, acc[q]);
    }
  }
  for (; j + 8 <= n; j += 8) {
    __m256d lo[R];
    __m256d hi[R];
    for (int r = 0; r < R; ++r) {
      lo[r] = _mm256_loadu_pd(c + r * ld + j);
      hi[r] = _mm256_loadu_pd(c + r * ld + j + 4);
    }
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * ld + j);
      const __m256d b1 = _mm256_loadu_pd(b + p * ld + j + 4);
      for (int r = 0; r < R; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + r * k + p);
        lo[r] = _mm256_fmadd_pd(av, b0, lo[r]);
        hi[r] = _mm256_fmadd_pd(av, b1, hi[r]);
      }
    }
    for (int r = 0; r < R; ++r) {
      _mm256_storeu_pd(c + r * ld + j, lo[r]);
      _mm256_storeu_pd(c + r * ld + j + 4, hi[r]);
    }
  }
  for (; j + 4 <= n; j += 4) {
    __m256d acc[R];
    for (int r = 0; r < R; ++r) acc[r] = _mm256_loadu_pd(c + r * ld + j);
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * ld + j);
      for (int r = 0; r < R; ++r) acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + r * k + p), b0, acc[r]);
    }
    for (int r = 0; r < R; ++r) _mm256_storeu_pd(c + r * ld + j, acc[r]);
  }
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      double s = c[r * ld + j];
      for (std::size_t p = 0; p < k; ++p) s = std::fma(a[r * k + p], b[p * ld + j], s);
      c[r * ld + j] = s;
    }
  }
}

// Column panels outermost so a k x 32 slice of b stays cached across row blocks.
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  constexpr std::size_t kPanel = 32;
  for (std::size_t j0 = 0; j0 < n; j0 += kPanel) {
    const std::size_t w = n - j0 < kPanel ? n - j0 : kPanel;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) gemm_nn_rows<4>(w, n, k, a + i * k, b + j0, c + i * n + j0);
    for (; i < m; ++i) gemm_nn_rows<1>(w, n, k, a + i * k, b + j0, c + i * n + j0);
  }
}

// Grow-only scratch for packed operands. Internal linkage, so nothing here
// is shared with code built without AVX2.
struct Scratch {
  double* data = nullptr;
  std::size_t size = 0;
  ~Scratch() { delete[] data; }
  double* get(std::size_t n) {
    if (n > size) {
      delete[] data;
      data = new double[n];
      size = n;
    }
    return data;
  }
};

thread_local Scratch scratch;

// dst[cols x rows] = src[rows x cols]^T
void pack_transpose(std::size_t rows, std::size_t cols, const double* src, double* dst) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// R rows of a against C columns of b. Every element is one 4-lane fma chain
// over p, a fixed horizontal sum, then an fma tail, whatever the blocking.
template <int R, int C>
inline void dot_block(std::size_t k, const double* a, const double* b, double* c, std::size_t ldc) {
  __m256d acc[R][C];
  for (int r = 0; r < R; ++r)
    for (int q = 0; q < C; ++q) acc[r][q] = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 4 <= k; p += 4) {
    __m256d bv[C];
    for (int q = 0; q < C; ++q) bv[q] = _mm256_loadu_pd(b + q * k + p);
    for (int r = 0; r < R; ++r) {
      const __m256d av = _mm256_loadu_pd(a + r * k + p);
      for (int q = 0; q < C; ++q) acc[r][q] = _mm256_fmadd_pd(av, bv[q], acc[r][q]);
    }
  }
  for (int r = 0; r < R; ++r) {
    for (int q = 0; q < C; ++q) {
      double s = hsum(acc[r][q]);
      for (std::size_t t = p; t < k; ++t) s = std::fma(a[r * k + t], b[q * k + t], s);
      c[r * ldc + q] += s;
    }
  }
}

// c[m x n] += a[m x k] * b[n x k]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  std::size_t i = 0;
  for (; i + 2 <= m; i += 2) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) dot_block<2, 4>(k, a + i * k, b + j * k, c + i * n + j, n);
    for (; j < n; ++j) dot_block<2, 1>(k, a + i * k, b + j * k, c + i * n + j, n);
  }
  for (; i < m; ++i) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) dot_block<1, 4>(k, a + i * k, b + j * k, c + i * n + j, n);
    for (; j < n; ++j) dot_block<1, 1>(k, a + i * k, b + j * k, c + i * n + j, n);
  }
}

// c[m x n] += a[k x m]^T * b[k x n]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  double* at = scratch.get(m * k);
  pack_transpose(k, m, a, at);
  gemm_nn(m, n, k, at, b, c);
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

// No fma here: the update matches the scalar reference bit for bit.
void adam_update(std::size_t n, double* param, double* m, double* v, const double* grad, double lr, double beta1,
                 double beta2, double eps, double bias1, double bias2) {
  const double one_minus_b1 = 1.0 - beta1;
  const double one_minus_b2 = 1.0 - beta2;
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vc1 = _mm256_set1_pd(one_minus_b1);
  const __m256d vc2 = _mm256_set1_pd(one_minus_b2);
  const __m256d vbias1 = _mm256_set1_pd(bias1);
  const __m256d vbias2 = _mm256_set1_pd(bias2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(vc1, g));
    const __m256d vi =
        _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(vc2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, vbias1);
    const __m256d v_hat = _mm256_div_pd(vi, vbias2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), veps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + one_minus_b1 * g;
    v[i] = beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

const KernelTable& avx2_impl() {
  static const KernelTable table{Backend::Avx2, "avx2", gemm_nn, gemm_nt, gemm_tn, add, sub, mul, axpy, adam_update};
  return table;
}

}  // namespace aesmpn::numerics::kernels::detail
