#include "composolve/kernels.hpp"

#if defined(COMPOSOLVE_HAVE_NEON_KERNELS)

#include <arm_neon.h>

namespace composolve::kernels::neon {

// float64x2_t holds two lanes; a pair of registers reproduces the four
// interleaved partial sums of the reference order.
double dot(const double* a, const double* b, std::size_t n) {
  const std::size_t blocked = n - n % 4;
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i < blocked; i += 4) {
    acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double sum = (vgetq_lane_f64(acc01, 0) + vgetq_lane_f64(acc01, 1)) +
               (vgetq_lane_f64(acc23, 0) + vgetq_lane_f64(acc23, 1));
  for (; i < n; ++i) sum = sum + a[i] * b[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const std::size_t blocked = n - n % 2;
  std::size_t i = 0;
  for (; i < blocked; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void axpby(double alpha, const double* x, double beta, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const float64x2_t vb = vdupq_n_f64(beta);
  const std::size_t blocked = n - n % 2;
  std::size_t i = 0;
  for (; i < blocked; i += 2) {
    const float64x2_t ax = vmulq_f64(va, vld1q_f64(x + i));
    const float64x2_t by = vmulq_f64(vb, vld1q_f64(y + i));
    vst1q_f64(y + i, vaddq_f64(ax, by));
  }
  for (; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  const std::size_t blocked = n - n % 2;
  std::size_t i = 0;
  for (; i < blocked; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void soft_threshold(const double* x, double threshold, double* out, std::size_t n) {
  const float64x2_t thr = vdupq_n_f64(threshold);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const uint64x2_t sign_mask = vdupq_n_u64(0x8000000000000000ULL);
  const std::size_t blocked = n - n % 2;
  std::size_t i = 0;
  for (; i < blocked; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    const float64x2_t shrunk = vsubq_f64(vabsq_f64(v), thr);
    // Select zero only where 0 > shrunk; NaN lanes keep NaN.
    const uint64x2_t below = vcgtq_f64(zero, shrunk);
    const float64x2_t clamped = vbslq_f64(below, zero, shrunk);
    const float64x2_t result = vbslq_f64(sign_mask, v, clamped);
    vst1q_f64(out + i, result);
  }
  if (i < n) scalar::soft_threshold(x + i, threshold, out + i, n - i);
}

}  // namespace composolve::kernels::neon

#endif
