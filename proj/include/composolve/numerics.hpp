#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace composolve {

/// Dense vector of doubles. Construction from caller-supplied values
/// rejects NaN/inf; arithmetic results are not re-checked.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t size, double fill = 0.0) : values_(size, fill) {}
  Vector(std::initializer_list<double> values);

  /// Takes ownership of `values`. Throws DomainError on a non-finite entry.
  static Vector from(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  const std::vector<double>& values() const noexcept { return values_; }

  void fill(double value);
  bool all_finite() const noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> values_;
};

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  /// Row-major `values`. Throws DomainError on size mismatch or non-finite entry.
  static Matrix from(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return values_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> flat() noexcept { return values_; }
  std::span<const double> flat() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  void fill(double value);
  /// Reshape to rows x cols and zero every entry.
  void assign_zero(std::size_t rows, std::size_t cols);
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Linear algebra on spans. All routines dispatch to kernels::active().

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm_sq(std::span<const double> v);
double l2_norm(std::span<const double> v);
double max_abs(std::span<const double> v);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = alpha * x + beta * y
void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y);
/// out = a - b (out may alias a or b)
void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out);
void scale(double alpha, std::span<double> v);

/// out = A x
void matvec(const Matrix& a, std::span<const double> x, std::span<double> out);
/// out = A^T v
void matvec_transposed(const Matrix& a, std::span<const double> v, std::span<double> out);

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double alpha, const Vector& v);

// ---------------------------------------------------------------------------
// Random streams.

/// Counter-based SplitMix64 stream.
///
/// Draw k (k = 0, 1, 2, ...) of a stream with seed s is
///   mix(s + (k + 1) * 0x9E3779B97F4A7C15  mod 2^64)
/// where mix is the SplitMix64 finalizer
///   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
///   z ^= z >> 27; z *= 0x94D049BB133111EB;
///   z ^= z >> 31.
/// Every derived quantity uses a fixed number of draws:
///   next_uniform : 1 draw,  (u >> 11) * 2^-53 in [0, 1)
///   next_index(n): 1 draw,  floor(u * n / 2^64)
///   next_normal  : 2 draws, Box-Muller cosine branch
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  /// Number of 64-bit draws consumed so far.
  std::uint64_t draws() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  double next_uniform() noexcept;
  double next_uniform(double lo, double hi) noexcept;
  std::size_t next_index(std::size_t n) noexcept;
  double next_normal() noexcept;

  /// Independent stream keyed by (seed, stream_id); does not advance *this.
  RngStream substream(std::uint64_t stream_id) const noexcept;

  static std::uint64_t mix(std::uint64_t z) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// k indices drawn uniformly and independently from [0, n), advancing the
/// stream by exactly k draws. Throws DomainError if n == 0.
std::vector<std::size_t> sample_with_replacement(RngStream& rng, std::size_t n, std::size_t k);

/// Writes into `out` (size k); same draw semantics as above.
void sample_with_replacement_into(RngStream& rng, std::size_t n, std::span<std::size_t> out);

Vector random_normal_vector(RngStream& rng, std::size_t n);

// ---------------------------------------------------------------------------
// Finite differences.

inline constexpr double kDefaultFiniteDifferenceStep = 1e-5;

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Component i is (f(x + h e_i) - f(x - h e_i)) / (2h).
/// Throws DomainError if h <= 0 and NumericError if f is non-finite at a probe.
Vector central_difference_gradient(const ScalarFunction& f, std::span<const double> x,
                                   double h = kDefaultFiniteDifferenceStep);

/// Relative error ||a - b|| / max(||b||, floor).
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-12);

}  // namespace composolve
