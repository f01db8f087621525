#include "composolve/kernels.hpp"

#if defined(COMPOSOLVE_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#define COMPOSOLVE_AVX2 __attribute__((target("avx2")))

namespace composolve::kernels::avx2 {

COMPOSOLVE_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  const std::size_t blocked = n - n % 4;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i < blocked; i += 4) {
    // mul then add, never fmadd: must round like the scalar reference.
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, prod);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) sum = sum + a[i] * b[i];
  return sum;
}

COMPOSOLVE_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const std::size_t blocked = n - n % 4;
  std::size_t i = 0;
  for (; i < blocked; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

COMPOSOLVE_AVX2 void axpby(double alpha, const double* x, double beta, double* y,
                           std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  const std::size_t blocked = n - n % 4;
  std::size_t i = 0;
  for (; i < blocked; i += 4) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(ax, by));
  }
  for (; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

COMPOSOLVE_AVX2 void sub(const double* a, const double* b, double* out, std::size_t n) {
  const std::size_t blocked = n - n % 4;
  std::size_t i = 0;
  for (; i < blocked; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

COMPOSOLVE_AVX2 void soft_threshold(const double* x, double threshold, double* out,
                                    std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d thr = _mm256_set1_pd(threshold);
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t blocked = n - n % 4;
  std::size_t i = 0;
  for (; i < blocked; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d magnitude = _mm256_andnot_pd(sign_mask, v);
    // max_pd(a, b) returns b unless a > b, matching `0 > s ? 0 : s`.
    const __m256d shrunk = _mm256_max_pd(zero, _mm256_sub_pd(magnitude, thr));
    const __m256d signed_result =
        _mm256_or_pd(_mm256_andnot_pd(sign_mask, shrunk), _mm256_and_pd(sign_mask, v));
    _mm256_storeu_pd(out + i, signed_result);
  }
  if (i < n) scalar::soft_threshold(x + i, threshold, out + i, n - i);
}

}  // namespace composolve::kernels::avx2

#endif
