#pragma once

#include <cstddef>
#include <cstdint>

namespace composolve {

/// Smoothness / curvature constants of a composition problem.
///
/// mu    strong-convexity modulus of f
/// L_f   Lipschitz constant of the per-sample composite gradient (and of grad f)
/// L_F   Lipschitz constant of grad F_i
/// L_G   Lipschitz constant of grad G_j (zero for affine inner maps)
/// B_F   bound on ||grad F_i|| over the region of interest
/// B_G   bound on ||grad G_j||
struct ProblemConstants {
  double mu = 1.0;
  double L_f = 1.0;
  double L_F = 1.0;
  double L_G = 1.0;
  double B_F = 1.0;
  double B_G = 1.0;

  /// Throws DomainError if mu, L_f, B_F, B_G are not positive, L_F, L_G are
  /// negative, or L_f < mu.
  void validate() const;
};

struct StronglyConvexParams {
  double eta;
  std::size_t m;
  std::size_t A;
  std::size_t B;
};

struct GeneralParams {
  double eta;
  std::size_t m;
  std::size_t b1;
  std::size_t A_min;
  std::size_t B_min;
};

/// eta = 1/(96 L_f), m = ceil(16 (1 + 96 L_f / mu)),
/// A = ceil(2048 B_G^4 L_F^2 / mu^2), B = ceil(2048 B_F^2 L_G^2 / mu^2), A, B >= 1.
StronglyConvexParams suggest_params_strongly_convex(const ProblemConstants& c);

/// m = floor((n1+n2)^(1/3)), eta = 1/(4 L_f), b1 = ceil((n1+n2)^(2/3)),
/// A_min = ceil(8 m^2 B_G^4 L_F^2 / L_f), B_min = ceil(8 m^2 B_F^2 L_G^2 / L_f), all >= 1.
GeneralParams suggest_params_general(std::size_t n1, std::size_t n2, const ProblemConstants& c);

/// Linear-rate factor of the epoch recursion for strongly convex problems,
/// with the auxiliary weight alpha fixed to mu / 8:
///
///   c   = 6 eta L_f + (eta/2 + 4/mu) (32/mu) (B_F^2 L_G^2 / B + B_G^4 L_F^2 / A)
///   rho = (2/mu + 2 eta c (m + 1)) / (2 eta (7/8 - c) m)
///
/// Values >= 1 mean the configuration carries no guarantee.
/// Throws ConfigurationError when the denominator is not positive.
double theorem1_rho(double eta, std::size_t m, std::size_t A, std::size_t B,
                    const ProblemConstants& c);

/// 4 (eta m^2 L_f^2 / b1 + 2 eta m^2 B_G^4 L_F^2 / A + 2 eta m^2 B_F^2 L_G^2 / B) + L_f / 2
///   <= 1 / (2 eta)
bool theorem3_condition_holds(double eta, std::size_t m, std::size_t A, std::size_t B,
                              std::size_t b1, const ProblemConstants& c);

/// floor(cbrt(n)) computed exactly.
std::size_t integer_cube_root(std::uint64_t n);

}  // namespace composolve
