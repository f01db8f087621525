#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "composolve/numerics.hpp"
#include "composolve/problems.hpp"
#include "composolve/regularizers.hpp"

namespace composolve {

/// H(x) = f(x) + h(x).
double objective_H(const CompositionProblem& p, const Regularizer& h, std::span<const double> x);

/// (1/eta) (x - prox(x - eta grad f(x), eta)).
/// For the zero regularizer this returns grad f(x) directly.
Vector gradient_mapping(const CompositionProblem& p, const Regularizer& h,
                        std::span<const double> x, double eta);

/// Same quantity from an already computed gradient.
Vector gradient_mapping_from(const Regularizer& h, std::span<const double> x,
                             std::span<const double> grad_f, double eta);

double grad_map_sq(const CompositionProblem& p, const Regularizer& h, std::span<const double> x,
                   double eta);

/// ||grad f(x) + g||^2 with g the min-norm subgradient of h at x.
double composite_grad_sq(const CompositionProblem& p, const Regularizer& h,
                         std::span<const double> x);
double composite_grad_sq_from(const Regularizer& h, std::span<const double> x,
                              std::span<const double> grad_f);

inline constexpr double kOptimumTolerance = 1e-7;

/// A candidate minimizer of H with its certificate ||G_eta(x)||.
struct ReferenceOptimum {
  Vector x;
  double objective = 0.0;
  double residual = 0.0;  // ||G_eta(x)||
  double eta = 0.0;       // step used for the certificate
  bool verified = false;  // residual <= kOptimumTolerance
};

/// Evaluates and certifies `x` as an optimum.
ReferenceOptimum certify_optimum(const CompositionProblem& p, const Regularizer& h, Vector x,
                                 double eta);

struct GapResult {
  double gap = 0.0;
  bool verified = false;  // false: x_star failed its certificate; gap is only indicative
};

/// H(x) - H(x_star).
GapResult objective_gap(const CompositionProblem& p, const Regularizer& h,
                        std::span<const double> x, const ReferenceOptimum& x_star);

/// One trace row.
struct TraceRecord {
  std::uint64_t epoch = 0;
  std::uint64_t inner_iter = 0;
  double wall_ms = 0.0;
  std::uint64_t q_inner_val = 0;
  std::uint64_t q_inner_jac = 0;
  std::uint64_t q_outer_grad = 0;
  double objective = 0.0;
  double gap = std::numeric_limits<double>::quiet_NaN();
  double grad_map_sq = 0.0;
  double composite_grad_sq = 0.0;

  std::uint64_t queries() const noexcept { return q_inner_val + q_inner_jac + q_outer_grad; }
};

/// Diagnostic quantities at x, computed on an uncounted problem.
struct Diagnostics {
  double objective = 0.0;
  double gap = std::numeric_limits<double>::quiet_NaN();
  double grad_map_sq = 0.0;
  double composite_grad_sq = 0.0;
};

Diagnostics evaluate_diagnostics(const CompositionProblem& p, const Regularizer& h,
                                 std::span<const double> x, double eta,
                                 const ReferenceOptimum* x_star);

/// Smallest value of a column over a trace; +inf for an empty trace.
double trace_min_grad_map_sq(const std::vector<TraceRecord>& trace);

}  // namespace composolve
