#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "composolve/solvers.hpp"

namespace composolve::detail {

/// Trace rows, budgets and divergence handling for one solver run.
/// Diagnostic time is excluded from wall_ms.
class RunMonitor {
 public:
  RunMonitor(const CompositionProblem& raw, const Regularizer& h, const TraceOptions& opts,
             double solver_eta, std::shared_ptr<QueryCounter> counter);

  /// True when `unit` more queries stay within the query budget.
  bool affordable(const QueryCounts& unit) const noexcept;
  bool out_of_time() const noexcept;

  void record(std::uint64_t epoch, std::uint64_t inner, std::span<const double> x);
  void keep(std::span<const double> x);

  SolveResult finish(Vector x, StopReason reason, std::uint64_t epochs,
                     std::uint64_t iterations);

  /// Throws DivergedError with the run up to `last_finite`.
  [[noreturn]] void diverge(const std::string& solver, Vector last_finite, std::uint64_t epochs,
                            std::uint64_t iterations);

  /// Whether inner iteration k (1-based) of an epoch with m iterations gets a row.
  bool due(std::uint64_t k, std::uint64_t m) const noexcept {
    return k == m || (opts_.stride > 0 && k % opts_.stride == 0);
  }

  bool last_row_is(std::uint64_t epoch, std::uint64_t inner) const noexcept;

 private:
  double elapsed_ms() const noexcept;

  const CompositionProblem& raw_;
  const Regularizer& h_;
  const TraceOptions& opts_;
  double diag_eta_;
  std::shared_ptr<QueryCounter> counter_;
  std::chrono::steady_clock::time_point start_;
  double excluded_ms_ = 0.0;
  std::vector<TraceRecord> trace_;
  std::vector<Vector> iterates_;
};

}  // namespace composolve::detail
