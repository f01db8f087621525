#include "composolve/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "composolve/errors.hpp"
#include "composolve/kernels.hpp"

namespace composolve {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError(std::string(what) + ": non-finite entry at index " + std::to_string(i));
    }
  }
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DomainError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                      std::to_string(b) + ")");
  }
}

}  // namespace

Vector::Vector(std::initializer_list<double> values) : values_(values) {
  require_finite(values_, "Vector");
}

Vector Vector::from(std::vector<double> values) {
  require_finite(values, "Vector");
  Vector v;
  v.values_ = std::move(values);
  return v;
}

void Vector::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool Vector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix Matrix::from(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) {
    throw DomainError("Matrix: expected " + std::to_string(rows * cols) + " entries, got " +
                      std::to_string(values.size()));
  }
  require_finite(values, "Matrix");
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.values_ = std::move(values);
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DomainError("Matrix::from_rows: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return from(r, c, std::move(values));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

void Matrix::assign_zero(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  values_.assign(rows * cols, 0.0);
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  return kernels::active().dot(a.data(), b.data(), a.size());
}

double l2_norm_sq(std::span<const double> v) {
  return kernels::active().dot(v.data(), v.data(), v.size());
}

double l2_norm(std::span<const double> v) { return std::sqrt(l2_norm_sq(v)); }

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  kernels::active().axpy(alpha, x.data(), y.data(), x.size());
}

void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpby");
  kernels::active().axpby(alpha, x.data(), beta, y.data(), x.size());
}

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  require_same_size(a.size(), b.size(), "subtract");
  require_same_size(a.size(), out.size(), "subtract");
  kernels::active().sub(a.data(), b.data(), out.data(), a.size());
}

void scale(double alpha, std::span<double> v) {
  for (double& x : v) x *= alpha;
}

void matvec(const Matrix& a, std::span<const double> x, std::span<double> out) {
  require_same_size(a.cols(), x.size(), "matvec");
  require_same_size(a.rows(), out.size(), "matvec");
  const auto& k = kernels::active();
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = k.dot(a.row(r).data(), x.data(), x.size());
}

void matvec_transposed(const Matrix& a, std::span<const double> v, std::span<double> out) {
  require_same_size(a.rows(), v.size(), "matvec_transposed");
  require_same_size(a.cols(), out.size(), "matvec_transposed");
  const auto& k = kernels::active();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (v[r] != 0.0) k.axpy(v[r], a.row(r).data(), out.data(), out.size());
  }
}

Vector operator+(const Vector& a, const Vector& b) {
  Vector out = a;
  axpy(1.0, b, out.span());
  return out;
}

Vector operator-(const Vector& a, const Vector& b) {
  Vector out(a.size());
  subtract(a, b, out.span());
  return out;
}

Vector operator*(double alpha, const Vector& v) {
  Vector out = v;
  scale(alpha, out.span());
  return out;
}

std::uint64_t RngStream::mix(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double RngStream::next_uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_uniform(double lo, double hi) noexcept {
  return lo + (hi - lo) * next_uniform();
}

std::size_t RngStream::next_index(std::size_t n) noexcept {
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

double RngStream::next_normal() noexcept {
  const double u1 = 1.0 - next_uniform();  // (0, 1]
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::substream(std::uint64_t stream_id) const noexcept {
  return RngStream(mix(seed_ ^ mix(stream_id + 0x632BE59BD9B4E019ULL)));
}

std::vector<std::size_t> sample_with_replacement(RngStream& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> out(k);
  sample_with_replacement_into(rng, n, out);
  return out;
}

void sample_with_replacement_into(RngStream& rng, std::size_t n, std::span<std::size_t> out) {
  if (n == 0) throw DomainError("sample_with_replacement: population size must be positive");
  for (auto& idx : out) idx = rng.next_index(n);
}

Vector random_normal_vector(RngStream& rng, std::size_t n) {
  Vector v(n);
  for (auto& x : v) x = rng.next_normal();
  return v;
}

Vector central_difference_gradient(const ScalarFunction& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw DomainError("central_difference_gradient: step must be positive");
  Vector grad(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double plus = f(probe);
    probe[i] = x[i] - h;
    const double minus = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("central_difference_gradient: non-finite value probing coordinate " +
                         std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  require_same_size(a.size(), b.size(), "relative_error");
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(ref), floor);
}

}  // namespace composolve
