#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "composolve/errors.hpp"
#include "composolve/numerics.hpp"
#include "support.hpp"

using namespace composolve;

TEST_CASE("vector and matrix construction rejects non-finite user data") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Vector::from({1.0, nan}), DomainError);
  CHECK_THROWS_AS(Vector::from({inf}), DomainError);
  CHECK_THROWS_AS(Matrix::from(1, 2, {0.0, -inf}), DomainError);
  CHECK_THROWS_AS(Matrix::from(2, 2, {1.0, 2.0, 3.0}), DomainError);

  const Matrix m = Matrix::from(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.size() == 6);
  CHECK(m(1, 0) == 4.0);
  CHECK(m.row(1)[2] == 6.0);
  CHECK(Vector::from({1, 2, 3}).size() == 3);
}

TEST_CASE("norms") {
  CHECK(l2_norm_sq(Vector{0, 0, 0}) == 0.0);
  CHECK(l2_norm_sq(Vector{3, 4}) == 25.0);
  CHECK(l2_norm(Vector{3, 4}) == 5.0);

  RngStream rng(5);
  const Vector v = testing_support::random_vec(rng, 100);
  long double naive = 0;
  for (double x : v) naive += static_cast<long double>(x) * x;
  CHECK(std::fabs(l2_norm_sq(v) - static_cast<double>(naive)) <= 1e-12 * static_cast<double>(naive));
}

TEST_CASE("dense operations match naive loops") {
  RngStream rng(9);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 33u}) {
    const Vector a = testing_support::random_vec(rng, n), b = testing_support::random_vec(rng, n);
    double d = 0;
    for (std::size_t k = 0; k < n; ++k) d += a[k] * b[k];
    CHECK(dot(a, b) == doctest::Approx(d).epsilon(1e-13));

    Vector y = b;
    axpy(0.5, a, y.span());
    Vector z = b;
    axpby(2.0, a, -1.0, z.span());
    Vector s(n);
    subtract(a, b, s.span());
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(y[k] == b[k] + 0.5 * a[k]);
      CHECK(z[k] == 2.0 * a[k] - b[k]);
      CHECK(s[k] == a[k] - b[k]);
    }
  }

  const Matrix m = Matrix::from(2, 3, {1, 2, 3, 4, 5, 6});
  Vector out(2);
  matvec(m, Vector{1, 0, -1}, out.span());
  CHECK(out == Vector{-2, -2});
  Vector back(3);
  matvec_transposed(m, Vector{1, 1}, back.span());
  CHECK(back == Vector{5, 7, 9});

  CHECK_THROWS_AS(dot(Vector{1, 2}, Vector{1}), DomainError);
}

TEST_CASE("subtract may alias its inputs") {
  Vector a{5, 6, 7};
  const Vector b{1, 1, 1};
  subtract(a, b, a.span());
  CHECK(a == Vector{4, 5, 6});
}

TEST_CASE("rng streams replay") {
  RngStream a(42), b(42), c(43);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const std::uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
  CHECK(a.draws() == 100);

  // Substreams are deterministic and distinct from their parent.
  RngStream s1 = RngStream(42).substream(1), s2 = RngStream(42).substream(1);
  RngStream s3 = RngStream(42).substream(2);
  const std::uint64_t v = s1.next_u64();
  CHECK(v == s2.next_u64());
  CHECK(v != s3.next_u64());
}

TEST_CASE("rng uniform and normal draws have the right moments") {
  RngStream rng(3);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int k = 0; k < n; ++k) {
    const double u = rng.next_uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    su += u;
    const double z = rng.next_normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::fabs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::fabs(sn / n) < 4 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("sample_with_replacement") {
  RngStream rng(1);
  CHECK(sample_with_replacement(rng, 5, 0).empty());
  CHECK(sample_with_replacement(rng, 1, 3) == std::vector<std::size_t>{0, 0, 0});
  CHECK_THROWS_AS(sample_with_replacement(rng, 0, 2), DomainError);

  RngStream a(42), b(42);
  CHECK(sample_with_replacement(a, 10, 4) == sample_with_replacement(b, 10, 4));

  // The stream advances by exactly k draws.
  RngStream c(7);
  const std::uint64_t before = c.draws();
  sample_with_replacement(c, 10, 13);
  CHECK(c.draws() - before == 13);
}

TEST_CASE("sample_with_replacement is uniform") {
  RngStream rng(2024);
  const std::size_t n = 10, draws = 100000;
  std::vector<double> freq(n, 0);
  for (std::size_t i : sample_with_replacement(rng, n, draws)) {
    REQUIRE(i < n);
    freq[i] += 1;
  }
  const double sd = std::sqrt(0.1 * 0.9 / draws);
  for (double f : freq) CHECK(std::fabs(f / draws - 0.1) <= 4 * sd);
}

TEST_CASE("central_difference_gradient") {
  // Exact in exact arithmetic; rounding in (x+h)^2 - (x-h)^2 leaves ~1e-11.
  const Vector g = central_difference_gradient(
      [](std::span<const double> x) { return x[0] * x[0]; }, Vector{3.0}, 1e-5);
  CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-9));

  const Vector zero = central_difference_gradient(
      [](std::span<const double>) { return 4.0; }, Vector{1, -2, 3});
  CHECK(zero == Vector{0, 0, 0});

  const Vector e = central_difference_gradient(
      [](std::span<const double> x) { return std::exp(x[0]); }, Vector{1.0, 0.0});
  CHECK(std::fabs(e[0] - std::exp(1.0)) <= 1e-8 * std::exp(1.0));
  CHECK(e[1] == 0.0);

  CHECK_THROWS_AS(central_difference_gradient(
                      [](std::span<const double> x) { return std::log(x[0]); }, Vector{0.0}),
                  NumericError);
  CHECK_THROWS_AS(central_difference_gradient(
                      [](std::span<const double> x) { return x[0]; }, Vector{0.0}, 0.0),
                  DomainError);
}

TEST_CASE("central_difference_gradient agrees with analytic gradients") {
  RngStream rng(77);
  const Matrix A = Matrix::from(3, 3, {2, 1, 0, 1, 3, 1, 0, 1, 4});
  for (int k = 0; k < 20; ++k) {
    const Vector x = testing_support::random_vec(rng, 3);
    auto f = [&](std::span<const double> z) {
      Vector az(3);
      matvec(A, z, az.span());
      return 0.5 * dot(z, az) + std::sin(z[0]) + std::exp(0.3 * z[2]);
    };
    Vector analytic(3);
    matvec(A, x, analytic.span());
    analytic[0] += std::cos(x[0]);
    analytic[2] += 0.3 * std::exp(0.3 * x[2]);
    CHECK(relative_error(central_difference_gradient(f, x), analytic) <= 1e-5);
  }
}

TEST_CASE("relative_error") {
  CHECK(relative_error(Vector{1, 1}, Vector{1, 1}) == 0.0);
  CHECK(relative_error(Vector{2, 0}, Vector{1, 0}) == doctest::Approx(1.0));
  CHECK(relative_error(Vector{1e-20}, Vector{0.0}) == doctest::Approx(1e-8));
}
