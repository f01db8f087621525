#include "monitor.hpp"

#include <algorithm>

namespace composolve::detail {

using Clock = std::chrono::steady_clock;

RunMonitor::RunMonitor(const CompositionProblem& raw, const Regularizer& h,
                       const TraceOptions& opts, double solver_eta,
                       std::shared_ptr<QueryCounter> counter)
    : raw_(raw),
      h_(h),
      opts_(opts),
      diag_eta_(opts.diagnostic_eta > 0.0 ? opts.diagnostic_eta : solver_eta),
      counter_(std::move(counter)),
      start_(Clock::now()) {
  if (opts.max_wall_seconds < 0.0) throw DomainError("trace options: negative wall budget");
}

double RunMonitor::elapsed_ms() const noexcept {
  const std::chrono::duration<double, std::milli> d = Clock::now() - start_;
  return d.count() - excluded_ms_;
}

bool RunMonitor::affordable(const QueryCounts& unit) const noexcept {
  if (opts_.max_queries == 0) return true;
  return counter_->total() + unit.total() <= opts_.max_queries;
}

bool RunMonitor::out_of_time() const noexcept {
  return opts_.max_wall_seconds > 0.0 && elapsed_ms() >= 1000.0 * opts_.max_wall_seconds;
}

bool RunMonitor::last_row_is(std::uint64_t epoch, std::uint64_t inner) const noexcept {
  return !trace_.empty() && trace_.back().epoch == epoch && trace_.back().inner_iter == inner;
}

void RunMonitor::record(std::uint64_t epoch, std::uint64_t inner, std::span<const double> x) {
  if (!opts_.record) return;
  const auto t0 = Clock::now();
  TraceRecord row;
  row.epoch = epoch;
  row.inner_iter = inner;
  row.wall_ms = elapsed_ms();
  if (!trace_.empty()) row.wall_ms = std::max(row.wall_ms, trace_.back().wall_ms);
  const QueryCounts q = counter_->snapshot();
  row.q_inner_val = q.inner_value;
  row.q_inner_jac = q.inner_jacobian;
  row.q_outer_grad = q.outer_gradient;
  const ReferenceOptimum* ref = opts_.x_star ? &*opts_.x_star : nullptr;
  const Diagnostics d = evaluate_diagnostics(raw_, h_, x, diag_eta_, ref);
  row.objective = d.objective;
  row.gap = d.gap;
  row.grad_map_sq = d.grad_map_sq;
  row.composite_grad_sq = d.composite_grad_sq;
  trace_.push_back(row);
  const std::chrono::duration<double, std::milli> spent = Clock::now() - t0;
  excluded_ms_ += spent.count();
}

void RunMonitor::keep(std::span<const double> x) {
  if (!opts_.keep_iterates) return;
  Vector v(x.size());
  std::copy(x.begin(), x.end(), v.begin());
  iterates_.push_back(std::move(v));
}

SolveResult RunMonitor::finish(Vector x, StopReason reason, std::uint64_t epochs,
                               std::uint64_t iterations) {
  SolveResult r;
  r.x_final = std::move(x);
  r.trace = std::move(trace_);
  r.counts = counter_->snapshot();
  r.iterates = std::move(iterates_);
  r.stop = reason;
  r.epochs_completed = epochs;
  r.iterations = iterations;
  return r;
}

void RunMonitor::diverge(const std::string& solver, Vector last_finite, std::uint64_t epochs,
                         std::uint64_t iterations) {
  SolveResult partial = finish(std::move(last_finite), StopReason::completed, epochs, iterations);
  throw DivergedError(solver + ": non-finite iterate after " + std::to_string(iterations) +
                          " iterations",
                      std::move(partial));
}

}  // namespace composolve::detail
