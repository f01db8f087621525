#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "composolve/problems.hpp"

namespace composolve {

/// Query tallies by kind. One query returns one of
///   G_j(x)        (inner value),
///   grad G_j(x)   (inner Jacobian),
///   grad F_i(y)   (outer gradient).
/// Outer function values are diagnostics and never counted.
struct QueryCounts {
  std::uint64_t inner_value = 0;
  std::uint64_t inner_jacobian = 0;
  std::uint64_t outer_gradient = 0;

  std::uint64_t total() const noexcept { return inner_value + inner_jacobian + outer_gradient; }

  QueryCounts& operator+=(const QueryCounts& o) noexcept;
  friend QueryCounts operator+(QueryCounts a, const QueryCounts& b) noexcept { return a += b; }
  friend QueryCounts operator*(std::uint64_t k, const QueryCounts& c) noexcept;
  friend bool operator==(const QueryCounts&, const QueryCounts&) = default;
};

/// Monotone, thread-safe tallies.
class QueryCounter {
 public:
  void add_inner_value(std::uint64_t k = 1) noexcept {
    inner_value_.fetch_add(k, std::memory_order_relaxed);
  }
  void add_inner_jacobian(std::uint64_t k = 1) noexcept {
    inner_jacobian_.fetch_add(k, std::memory_order_relaxed);
  }
  void add_outer_gradient(std::uint64_t k = 1) noexcept {
    outer_gradient_.fetch_add(k, std::memory_order_relaxed);
  }

  QueryCounts snapshot() const noexcept;
  std::uint64_t total() const noexcept { return snapshot().total(); }

 private:
  std::atomic<std::uint64_t> inner_value_{0};
  std::atomic<std::uint64_t> inner_jacobian_{0};
  std::atomic<std::uint64_t> outer_gradient_{0};
};

/// Delegates every evaluator to `base` and tallies one query per index
/// evaluated. Holds a reference to `base`, which must outlive it.
class CountedProblem final : public CompositionProblem {
 public:
  CountedProblem(const CompositionProblem& base, std::shared_ptr<QueryCounter> counter);

  std::string_view kind() const noexcept override { return base_.kind(); }
  std::size_t n1() const noexcept override { return base_.n1(); }
  std::size_t n2() const noexcept override { return base_.n2(); }
  std::size_t dim_x() const noexcept override { return base_.dim_x(); }
  std::size_t dim_y() const noexcept override { return base_.dim_y(); }

  const CompositionProblem& base() const noexcept { return base_; }
  const std::shared_ptr<QueryCounter>& counter() const noexcept { return counter_; }
  QueryCounts counts() const noexcept { return counter_->snapshot(); }

 private:
  void do_inner_value(std::size_t j, std::span<const double> x,
                      std::span<double> out) const override;
  void do_inner_jacobian(std::size_t j, std::span<const double> x, Matrix& out) const override;
  double do_outer_value(std::size_t i, std::span<const double> y) const override;
  void do_outer_gradient(std::size_t i, std::span<const double> y,
                         std::span<double> out) const override;

  const CompositionProblem& base_;
  std::shared_ptr<QueryCounter> counter_;
};

/// Wrap `base` with a fresh counter.
CountedProblem counted(const CompositionProblem& base);

/// Component gradients of a finite sum are tallied as outer-gradient
/// queries: a finite sum is the composition with G(x) = x and F_i = f_i.
/// Component values are uncounted.
class CountedFiniteSum final : public FiniteSumProblem {
 public:
  CountedFiniteSum(const FiniteSumProblem& base, std::shared_ptr<QueryCounter> counter);

  std::string_view kind() const noexcept override { return base_.kind(); }
  std::size_t n() const noexcept override { return base_.n(); }
  std::size_t dim() const noexcept override { return base_.dim(); }

  const std::shared_ptr<QueryCounter>& counter() const noexcept { return counter_; }
  QueryCounts counts() const noexcept { return counter_->snapshot(); }

 private:
  double do_comp_value(std::size_t i, std::span<const double> x) const override;
  void do_comp_gradient(std::size_t i, std::span<const double> x,
                        std::span<double> out) const override;

  const FiniteSumProblem& base_;
  std::shared_ptr<QueryCounter> counter_;
};

// ---------------------------------------------------------------------------
// Closed-form costs.

/// S (n1 + 2 n2 + m (2A + 2B + 2 b1)).
std::uint64_t vrsc_pg_cost(std::uint64_t n1, std::uint64_t n2, std::uint64_t m, std::uint64_t A,
                           std::uint64_t B, std::uint64_t b1, std::uint64_t epochs);

/// Per-kind split of vrsc_pg_cost after `epochs` complete epochs plus
/// `extra_inner` inner iterations of a partially completed one.
QueryCounts vrsc_pg_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t m, std::uint64_t A,
                           std::uint64_t B, std::uint64_t b1, std::uint64_t epochs,
                           std::uint64_t extra_inner = 0);

/// Cost of the full-batch snapshot: (n2, n2, n1).
QueryCounts snapshot_counts(std::uint64_t n1, std::uint64_t n2);

/// One VRSC-PG inner iteration: (2A, 2B, 2 b1).
QueryCounts vrsc_pg_inner_counts(std::uint64_t A, std::uint64_t B, std::uint64_t b1);

/// Proximal SCGD: (T, T, T).
QueryCounts scpg_counts(std::uint64_t iterations);

/// Proximal SVRG: (0, 0, epochs (n + 2 m) + extra_inner * 2).
QueryCounts prox_svrg_counts(std::uint64_t n, std::uint64_t m, std::uint64_t epochs,
                             std::uint64_t extra_inner = 0);

/// Deterministic proximal gradient, one full gradient per step: steps (n2, n2, n1).
QueryCounts prox_full_gradient_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t steps);

}  // namespace composolve
