#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "composolve/errors.hpp"
#include "composolve/metrics.hpp"
#include "composolve/numerics.hpp"
#include "composolve/oracle.hpp"
#include "composolve/params.hpp"
#include "composolve/problems.hpp"
#include "composolve/regularizers.hpp"

namespace composolve {

// ---------------------------------------------------------------------------
// Configurations.

enum class SamplingMode {
  with_replacement,  // A_t, B_t, I_t drawn uniformly with replacement
  full_pass,         // A_t = B_t = [0, n2), I_t = [0, n1); requires A = B = n2, b1 = n1
};

struct VrscpgConfig {
  double eta = 0.1;
  std::size_t m = 10;
  std::size_t epochs = 10;
  std::size_t A = 5;
  std::size_t B = 5;
  std::size_t b1 = 5;
  std::uint64_t seed = 0;
  SamplingMode sampling = SamplingMode::with_replacement;
  std::optional<Vector> x0;  // zeros when absent

  /// Throws DomainError on a nonpositive count or step, or a full_pass
  /// configuration whose batch sizes are not the full index ranges.
  void validate(const CompositionProblem& p) const;
};

/// Proximal SCGD with decaying steps
///   alpha_t = alpha0 / (1 + t)^exp_alpha,  beta_t = beta0 / (1 + t)^exp_beta.
struct ScpgConfig {
  double alpha0 = 0.1;
  double beta0 = 1.0;
  double exp_alpha = 0.75;
  double exp_beta = 0.5;
  std::size_t iters = 1000;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;  // zeros when absent
  std::optional<Vector> y0;  // zeros when absent

  void validate(const CompositionProblem& p) const;
};

struct ProxSvrgConfig {
  double eta = 0.1;
  std::size_t m = 10;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;

  void validate(const FiniteSumProblem& p) const;
};

struct ProxFullGradientConfig {
  double eta = 0.1;
  std::size_t iters = 1000;
  double tol = 0.0;  // stop once ||x_{t+1} - x_t|| <= tol
  std::optional<Vector> x0;

  void validate(const CompositionProblem& p) const;
};

/// Recording and stopping options shared by all solvers.
struct TraceOptions {
  /// Record a row every `stride` inner iterations (0: epoch ends only).
  /// Rows are also written at the start and at every epoch end.
  std::size_t stride = 1;
  /// Optimum for the gap column; gap is NaN when absent.
  std::optional<ReferenceOptimum> x_star;
  /// Step used in the gradient-mapping column; 0 means the solver's step.
  double diagnostic_eta = 0.0;
  /// Stop before any unit of work that would push the total past this (0: none).
  std::uint64_t max_queries = 0;
  /// Stop once this much solver time has elapsed (0: none).
  double max_wall_seconds = 0.0;
  /// Keep every iterate x_t in SolveResult::iterates.
  bool keep_iterates = false;
  /// Skip diagnostics entirely (trace stays empty). For benchmarking.
  bool record = true;
};

enum class StopReason { completed, converged, query_budget, wall_budget };

std::string_view to_string(StopReason r) noexcept;

struct SolveResult {
  Vector x_final;
  std::vector<TraceRecord> trace;
  QueryCounts counts;
  std::vector<Vector> iterates;
  StopReason stop = StopReason::completed;
  std::uint64_t epochs_completed = 0;
  std::uint64_t iterations = 0;  // inner iterations (or steps) over the whole run
};

/// A non-finite iterate. Carries the run up to the last finite iterate.
class DivergedError : public NumericError {
 public:
  DivergedError(const std::string& what, SolveResult partial)
      : NumericError(what), partial_(std::move(partial)) {}
  const SolveResult& partial() const noexcept { return partial_; }

 private:
  SolveResult partial_;
};

// ---------------------------------------------------------------------------
// VRSC-PG building blocks.

/// Full-batch state at the epoch reference point x_tilde.
struct Snapshot {
  Vector x_tilde;
  Vector G_s;           // (1/n2) sum_j G_j(x_tilde)
  Matrix J_s;           // (1/n2) sum_j grad G_j(x_tilde)
  Vector outer_grad_s;  // (1/n1) sum_i grad F_i(G_s)
  Vector grad_f_s;      // J_s^T outer_grad_s
};

/// n2 + n2 + n1 queries.
Snapshot take_snapshot(const CompositionProblem& p, std::span<const double> x_tilde);

/// G_s - (1/A) sum_a (G_a(x_tilde) - G_a(x)); 2A inner-value queries.
Vector estimate_inner_value(const Snapshot& snap, const CompositionProblem& p,
                            std::span<const double> x, std::span<const std::size_t> a_indices);

/// J_s - (1/B) sum_b (grad G_b(x_tilde) - grad G_b(x)); 2B inner-Jacobian queries.
Matrix estimate_inner_jacobian(const Snapshot& snap, const CompositionProblem& p,
                               std::span<const double> x,
                               std::span<const std::size_t> b_indices);

/// (1/b1) sum_i [J_hat^T grad F_i(G_hat) - J_s^T grad F_i(G_s)] + grad f(x_tilde);
/// 2 b1 outer-gradient queries.
Vector estimate_gradient_vt(const Snapshot& snap, const CompositionProblem& p,
                            std::span<const double> G_hat, const Matrix& J_hat,
                            std::span<const std::size_t> i_indices);

// ---------------------------------------------------------------------------
// Solvers. Each wraps the problem in its own query counter; trace
// diagnostics are evaluated on the unwrapped problem.

SolveResult vrsc_pg(const CompositionProblem& p, const Regularizer& h, const VrscpgConfig& cfg,
                    const TraceOptions& opts = {});

SolveResult scpg_baseline(const CompositionProblem& p, const Regularizer& h,
                          const ScpgConfig& cfg, const TraceOptions& opts = {});

/// Component gradients are counted as outer-gradient queries.
SolveResult prox_svrg(const FiniteSumProblem& p, const Regularizer& h, const ProxSvrgConfig& cfg,
                      const TraceOptions& opts = {});

/// Deterministic proximal gradient, one full gradient (n2, n2, n1) per step.
SolveResult prox_full_gradient(const CompositionProblem& p, const Regularizer& h,
                               const ProxFullGradientConfig& cfg, const TraceOptions& opts = {});

// ---------------------------------------------------------------------------
// Reference optimum.

/// Largest curvature of f along power-iteration directions, from central
/// differences of the full gradient around x. Exact for quadratic f.
double estimate_smoothness(const CompositionProblem& p, std::span<const double> x,
                           std::size_t iterations = 100, std::uint64_t seed = 7);

struct ReferenceSettings {
  double tol = 1e-12;  // ||x_{t+1} - x_t|| stopping rule of the polishing phase
  std::size_t max_iters = 1000000;
  double eta = 0.0;  // 0: 1 / estimate_smoothness
  /// Steps of accelerated proximal gradient (with restarts) run before the
  /// plain proximal-gradient polish.
  std::size_t accelerated_iters = 20000;
};

/// Minimizer of H certified by ||G_eta(x*)|| <= kOptimumTolerance.
ReferenceOptimum compute_reference_optimum(const CompositionProblem& p, const Regularizer& h,
                                           const ReferenceSettings& settings = {});

}  // namespace composolve
