#include "composolve/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "composolve/errors.hpp"

namespace composolve {
namespace {

bool positive(double v) { return v > 0.0 && std::isfinite(v); }
bool nonnegative(double v) { return v >= 0.0 && std::isfinite(v); }

std::size_t ceil_at_least_one(double v) {
  if (!std::isfinite(v) || v > static_cast<double>(std::numeric_limits<std::size_t>::max() / 2)) {
    throw ConfigurationError("parameter schedule overflows");
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v)));
}

// Smallest b with b^3 >= n^2, i.e. ceil(n^(2/3)), without rounding error.
std::size_t ceil_two_thirds_power(std::uint64_t n) {
  const unsigned __int128 target = static_cast<unsigned __int128>(n) * n;
  auto cube = [](std::uint64_t b) {
    const unsigned __int128 w = b;
    return w * w * w;
  };
  std::uint64_t b = static_cast<std::uint64_t>(std::cbrt(static_cast<double>(n)) *
                                               std::cbrt(static_cast<double>(n)));
  while (b > 0 && cube(b - 1) >= target) --b;
  while (cube(b) < target) ++b;
  return static_cast<std::size_t>(b);
}

}  // namespace

void ProblemConstants::validate() const {
  if (!positive(mu) || !positive(L_f) || !positive(B_F) || !positive(B_G)) {
    throw DomainError("problem constants: mu, L_f, B_F and B_G must be positive");
  }
  if (!nonnegative(L_F) || !nonnegative(L_G)) {
    throw DomainError("problem constants: L_F and L_G must be nonnegative");
  }
  if (L_f < mu) throw DomainError("problem constants: L_f must be at least mu");
}

std::size_t integer_cube_root(std::uint64_t n) {
  auto cube = [](std::uint64_t r) {
    const unsigned __int128 w = r;
    return w * w * w;
  };
  std::uint64_t r = static_cast<std::uint64_t>(std::cbrt(static_cast<double>(n)));
  while (r > 0 && cube(r) > n) --r;
  while (cube(r + 1) <= n) ++r;
  return static_cast<std::size_t>(r);
}

StronglyConvexParams suggest_params_strongly_convex(const ProblemConstants& c) {
  c.validate();
  StronglyConvexParams p{};
  p.eta = 1.0 / (96.0 * c.L_f);
  p.m = ceil_at_least_one(16.0 * (1.0 + 96.0 * c.L_f / c.mu));
  const double mu2 = c.mu * c.mu;
  p.A = ceil_at_least_one(2048.0 * std::pow(c.B_G, 4) * c.L_F * c.L_F / mu2);
  p.B = ceil_at_least_one(2048.0 * c.B_F * c.B_F * c.L_G * c.L_G / mu2);
  return p;
}

GeneralParams suggest_params_general(std::size_t n1, std::size_t n2, const ProblemConstants& c) {
  if (n1 == 0 || n2 == 0) throw DomainError("suggest_params_general: n1 and n2 must be positive");
  c.validate();
  const std::uint64_t n = static_cast<std::uint64_t>(n1) + n2;
  GeneralParams p{};
  p.m = std::max<std::size_t>(1, integer_cube_root(n));
  p.eta = 1.0 / (4.0 * c.L_f);
  p.b1 = ceil_two_thirds_power(n);
  const double m2 = static_cast<double>(p.m) * static_cast<double>(p.m);
  p.A_min = ceil_at_least_one(8.0 * m2 * std::pow(c.B_G, 4) * c.L_F * c.L_F / c.L_f);
  p.B_min = ceil_at_least_one(8.0 * m2 * c.B_F * c.B_F * c.L_G * c.L_G / c.L_f);
  return p;
}

double theorem1_rho(double eta, std::size_t m, std::size_t A, std::size_t B,
                    const ProblemConstants& c) {
  if (!positive(eta) || m == 0 || A == 0 || B == 0) {
    throw DomainError("theorem1_rho: eta, m, A and B must be positive");
  }
  c.validate();
  const double variance = c.B_F * c.B_F * c.L_G * c.L_G / static_cast<double>(B) +
                          std::pow(c.B_G, 4) * c.L_F * c.L_F / static_cast<double>(A);
  const double cc = 6.0 * eta * c.L_f + (eta / 2.0 + 4.0 / c.mu) * (32.0 / c.mu) * variance;
  const double md = static_cast<double>(m);
  const double denominator = 2.0 * eta * (7.0 / 8.0 - cc) * md;
  if (!(denominator > 0.0)) {
    throw ConfigurationError("theorem1_rho: nonpositive denominator (step or batches too small)");
  }
  return (2.0 / c.mu + 2.0 * eta * cc * (md + 1.0)) / denominator;
}

bool theorem3_condition_holds(double eta, std::size_t m, std::size_t A, std::size_t B,
                              std::size_t b1, const ProblemConstants& c) {
  if (!positive(eta) || m == 0 || A == 0 || B == 0 || b1 == 0) {
    throw DomainError("theorem3_condition_holds: arguments must be positive");
  }
  c.validate();
  const double m2 = static_cast<double>(m) * static_cast<double>(m);
  const double lhs =
      4.0 * (eta * m2 * c.L_f * c.L_f / static_cast<double>(b1) +
             2.0 * eta * m2 * std::pow(c.B_G, 4) * c.L_F * c.L_F / static_cast<double>(A) +
             2.0 * eta * m2 * c.B_F * c.B_F * c.L_G * c.L_G / static_cast<double>(B)) +
      c.L_f / 2.0;
  return lhs <= 1.0 / (2.0 * eta);
}

}  // namespace composolve
