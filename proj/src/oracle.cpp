#include "composolve/oracle.hpp"

#include "composolve/errors.hpp"

namespace composolve {

QueryCounts& QueryCounts::operator+=(const QueryCounts& o) noexcept {
  inner_value += o.inner_value;
  inner_jacobian += o.inner_jacobian;
  outer_gradient += o.outer_gradient;
  return *this;
}

QueryCounts operator*(std::uint64_t k, const QueryCounts& c) noexcept {
  return {k * c.inner_value, k * c.inner_jacobian, k * c.outer_gradient};
}

QueryCounts QueryCounter::snapshot() const noexcept {
  return {inner_value_.load(std::memory_order_relaxed),
          inner_jacobian_.load(std::memory_order_relaxed),
          outer_gradient_.load(std::memory_order_relaxed)};
}

CountedProblem::CountedProblem(const CompositionProblem& base,
                               std::shared_ptr<QueryCounter> counter)
    : base_(base), counter_(std::move(counter)) {
  if (!counter_) throw DomainError("CountedProblem: null counter");
}

void CountedProblem::do_inner_value(std::size_t j, std::span<const double> x,
                                    std::span<double> out) const {
  counter_->add_inner_value();
  base_.do_inner_value(j, x, out);
}

void CountedProblem::do_inner_jacobian(std::size_t j, std::span<const double> x,
                                       Matrix& out) const {
  counter_->add_inner_jacobian();
  base_.do_inner_jacobian(j, x, out);
}

double CountedProblem::do_outer_value(std::size_t i, std::span<const double> y) const {
  return base_.do_outer_value(i, y);
}

void CountedProblem::do_outer_gradient(std::size_t i, std::span<const double> y,
                                       std::span<double> out) const {
  counter_->add_outer_gradient();
  base_.do_outer_gradient(i, y, out);
}

CountedProblem counted(const CompositionProblem& base) {
  return CountedProblem(base, std::make_shared<QueryCounter>());
}

CountedFiniteSum::CountedFiniteSum(const FiniteSumProblem& base,
                                   std::shared_ptr<QueryCounter> counter)
    : base_(base), counter_(std::move(counter)) {
  if (!counter_) throw DomainError("CountedFiniteSum: null counter");
}

double CountedFiniteSum::do_comp_value(std::size_t i, std::span<const double> x) const {
  return base_.do_comp_value(i, x);
}

void CountedFiniteSum::do_comp_gradient(std::size_t i, std::span<const double> x,
                                        std::span<double> out) const {
  counter_->add_outer_gradient();
  base_.do_comp_gradient(i, x, out);
}

std::uint64_t vrsc_pg_cost(std::uint64_t n1, std::uint64_t n2, std::uint64_t m, std::uint64_t A,
                           std::uint64_t B, std::uint64_t b1, std::uint64_t epochs) {
  return epochs * (n1 + 2 * n2 + m * (2 * A + 2 * B + 2 * b1));
}

QueryCounts snapshot_counts(std::uint64_t n1, std::uint64_t n2) { return {n2, n2, n1}; }

QueryCounts vrsc_pg_inner_counts(std::uint64_t A, std::uint64_t B, std::uint64_t b1) {
  return {2 * A, 2 * B, 2 * b1};
}

QueryCounts vrsc_pg_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t m, std::uint64_t A,
                           std::uint64_t B, std::uint64_t b1, std::uint64_t epochs,
                           std::uint64_t extra_inner) {
  const QueryCounts per_epoch = snapshot_counts(n1, n2) + m * vrsc_pg_inner_counts(A, B, b1);
  QueryCounts total = epochs * per_epoch;
  if (extra_inner > 0) total += snapshot_counts(n1, n2) + extra_inner * vrsc_pg_inner_counts(A, B, b1);
  return total;
}

QueryCounts scpg_counts(std::uint64_t iterations) { return {iterations, iterations, iterations}; }

QueryCounts prox_svrg_counts(std::uint64_t n, std::uint64_t m, std::uint64_t epochs,
                             std::uint64_t extra_inner) {
  std::uint64_t grads = epochs * (n + 2 * m);
  if (extra_inner > 0) grads += n + 2 * extra_inner;
  return {0, 0, grads};
}

QueryCounts prox_full_gradient_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t steps) {
  return steps * snapshot_counts(n1, n2);
}

}  // namespace composolve
