// Compiled with -mavx2 -mfma; only reached through dispatch after a CPUID check.

#include <immintrin.h>

#include <cmath>

#include "lanolem/kernels.hpp"

namespace lanolem::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

void shifted_soft_threshold(const double* x, const double* shift, double tau, double* out, std::size_t n) noexcept {
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d vneg_tau = _mm256_set1_pd(-tau);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_loadu_pd(shift + i);
    const __m256d beta = _mm256_sub_pd(_mm256_loadu_pd(x + i), s);
    // beta > tau -> beta - tau ; beta < -tau -> beta + tau ; else 0
    const __m256d above = _mm256_cmp_pd(beta, vtau, _CMP_GT_OQ);
    const __m256d below = _mm256_cmp_pd(beta, vneg_tau, _CMP_LT_OQ);
    __m256d shrunk = _mm256_blendv_pd(zero, _mm256_sub_pd(beta, vtau), above);
    shrunk = _mm256_blendv_pd(shrunk, _mm256_add_pd(beta, vtau), below);
    _mm256_storeu_pd(out + i, _mm256_add_pd(s, shrunk));
  }
  if (i < n) scalar::shifted_soft_threshold(x + i, shift + i, tau, out + i, n - i);
}

void rank1_update(double* m, const double* v, double w, std::size_t n) noexcept {
  for (std::size_t j = 0; j < n; ++j) {
    const double wj = w * v[j];
    const __m256d vwj = _mm256_set1_pd(wj);
    double* col = m + j * n;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      // mul + add rather than fma keeps results bit-identical to the scalar path
      const __m256d prod = _mm256_mul_pd(vwj, _mm256_loadu_pd(v + i));
      _mm256_storeu_pd(col + i, _mm256_add_pd(_mm256_loadu_pd(col + i), prod));
    }
    for (; i < n; ++i) col[i] += wj * v[i];
  }
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double l1_distance(const double* a, const double* b, std::size_t n) noexcept {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += std::fabs(a[i] - b[i]);
  return total;
}

}  // namespace lanolem::kernels::avx2
