#include <cmath>
#include <string>

#include "composolve/errors.hpp"
#include "composolve/problems.hpp"
#include "dense_linalg.hpp"

namespace composolve {

PolicyEvalProblem::PolicyEvalProblem(Matrix transitions, Matrix rewards, double gamma)
    : transitions_(std::move(transitions)), rewards_(std::move(rewards)), gamma_(gamma) {
  const std::size_t S = transitions_.rows();
  if (S == 0 || transitions_.cols() != S) {
    throw DomainError("policy_eval: transition matrix must be square and nonempty");
  }
  if (rewards_.rows() != S || rewards_.cols() != S) {
    throw DomainError("policy_eval: reward matrix must match the transition matrix shape");
  }
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
    throw DomainError("policy_eval: discount must lie in (0, 1)");
  }
  if (!rewards_.all_finite()) throw DomainError("policy_eval: non-finite reward");
  for (std::size_t s = 0; s < S; ++s) {
    double row_sum = 0.0;
    for (double p : transitions_.row(s)) {
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw DomainError("policy_eval: transition probabilities must be strictly positive");
      }
      row_sum += p;
    }
    if (std::fabs(row_sum - 1.0) > 1e-9) {
      throw DomainError("policy_eval: row " + std::to_string(s) + " sums to " +
                        std::to_string(row_sum));
    }
  }
}

void PolicyEvalProblem::do_inner_value(std::size_t j, std::span<const double> x,
                                       std::span<double> out) const {
  const std::size_t S = num_states();
  const double weight = static_cast<double>(S);
  std::copy(x.begin(), x.end(), out.begin());
  const double next = gamma_ * x[j];
  for (std::size_t s = 0; s < S; ++s) {
    out[S + s] = weight * transitions_(s, j) * (rewards_(s, j) + next);
  }
}

void PolicyEvalProblem::do_inner_jacobian(std::size_t j, std::span<const double> /*x*/,
                                          Matrix& out) const {
  const std::size_t S = num_states();
  const double weight = static_cast<double>(S) * gamma_;
  out.fill(0.0);
  for (std::size_t s = 0; s < S; ++s) {
    out(s, s) = 1.0;
    out(S + s, j) = weight * transitions_(s, j);
  }
}

double PolicyEvalProblem::do_outer_value(std::size_t i, std::span<const double> y) const {
  const double residual = y[i] - y[num_states() + i];
  return residual * residual;
}

void PolicyEvalProblem::do_outer_gradient(std::size_t i, std::span<const double> y,
                                          std::span<double> out) const {
  const std::size_t S = num_states();
  std::fill(out.begin(), out.end(), 0.0);
  const double residual = y[i] - y[S + i];
  out[i] = 2.0 * residual;
  out[S + i] = -2.0 * residual;
}

Vector PolicyEvalProblem::expected_rewards() const {
  const std::size_t S = num_states();
  Vector rbar(S);
  for (std::size_t s = 0; s < S; ++s) rbar[s] = dot(transitions_.row(s), rewards_.row(s));
  return rbar;
}

Vector PolicyEvalProblem::bellman_operator(std::span<const double> x) const {
  check_x(x);
  const std::size_t S = num_states();
  Vector tx(S);
  for (std::size_t s = 0; s < S; ++s) {
    double acc = 0.0;
    for (std::size_t t = 0; t < S; ++t) acc += transitions_(s, t) * (rewards_(s, t) + gamma_ * x[t]);
    tx[s] = acc;
  }
  return tx;
}

Vector PolicyEvalProblem::exact_value_function() const {
  const auto S = static_cast<Eigen::Index>(num_states());
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(S, S) - gamma_ * Eigen::MatrixXd(detail::as_eigen(transitions_));
  const Vector rbar = expected_rewards();
  const Eigen::VectorXd solution = system.partialPivLu().solve(detail::as_eigen(rbar.span()));
  return detail::from_eigen(solution);
}

PolicyEvalProblem make_policy_eval(Matrix transitions, Matrix rewards, double gamma) {
  return PolicyEvalProblem(std::move(transitions), std::move(rewards), gamma);
}

}  // namespace composolve
