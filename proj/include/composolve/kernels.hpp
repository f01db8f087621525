#pragma once

// Dense inner-loop kernels with a scalar reference and SIMD variants.
//
// Every variant follows the same floating-point evaluation order, so all
// backends return bitwise identical results:
//   * elementwise kernels evaluate each lane independently, with no fused
//     multiply-add;
//   * reductions accumulate into four interleaved partial sums (lane k takes
//     indices congruent to k mod 4 over the full blocks), combine them as
//     (s0 + s1) + (s2 + s3), then add the tail left to right.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace composolve::kernels {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  Backend backend;
  std::string_view name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[i] = alpha * x[i] + beta * y[i]
  void (*axpby)(double alpha, const double* x, double beta, double* y, std::size_t n);
  // out[i] = a[i] - b[i]
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = sign(x[i]) * max(|x[i]| - threshold, 0)
  void (*soft_threshold)(const double* x, double threshold, double* out, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void axpby(double alpha, const double* x, double beta, double* y, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void soft_threshold(const double* x, double threshold, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define COMPOSOLVE_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void axpby(double alpha, const double* x, double beta, double* y, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void soft_threshold(const double* x, double threshold, double* out, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define COMPOSOLVE_HAVE_NEON_KERNELS 1
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void axpby(double alpha, const double* x, double beta, double* y, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void soft_threshold(const double* x, double threshold, double* out, std::size_t n);
}  // namespace neon
#endif

/// Tables compiled into this binary whose instruction set the CPU supports.
std::vector<const KernelTable*> available();

/// Table for a specific backend, or nullptr if unavailable on this machine.
const KernelTable* table_for(Backend backend);

/// Currently selected table. Defaults to the widest supported backend.
const KernelTable& active();

/// Force a backend. Returns false (and leaves the selection alone) if the
/// backend is not available.
bool select(Backend backend);

/// Restore the default selection.
void select_best();

}  // namespace composolve::kernels
