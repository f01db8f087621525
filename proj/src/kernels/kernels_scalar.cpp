#include <cmath>

#include "composolve/kernels.hpp"

namespace composolve::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t blocked = n - n % 4;
  std::size_t i = 0;
  for (; i < blocked; i += 4) {
    s0 = s0 + a[i] * b[i];
    s1 = s1 + a[i + 1] * b[i + 1];
    s2 = s2 + a[i + 2] * b[i + 2];
    s3 = s3 + a[i + 3] * b[i + 3];
  }
  double sum = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) sum = sum + a[i] * b[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void axpby(double alpha, const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void soft_threshold(const double* x, double threshold, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    // NaN propagates: 0 > NaN is false.
    const double shrunk = std::fabs(x[i]) - threshold;
    out[i] = std::copysign(0.0 > shrunk ? 0.0 : shrunk, x[i]);
  }
}

}  // namespace composolve::kernels::scalar
