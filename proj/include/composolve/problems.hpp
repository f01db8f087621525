#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "composolve/numerics.hpp"
#include "composolve/params.hpp"

namespace composolve {

/// Finite-sum composition f(x) = (1/n1) sum_i F_i( (1/n2) sum_j G_j(x) ),
/// with G_j : R^N -> R^M and F_i : R^M -> R.
///
/// Public entry points validate indices and dimensions, then forward to the
/// private virtual hooks. Evaluators are pure and safe to call concurrently.
class CompositionProblem {
 public:
  virtual ~CompositionProblem() = default;

  virtual std::string_view kind() const noexcept = 0;
  virtual std::size_t n1() const noexcept = 0;
  virtual std::size_t n2() const noexcept = 0;
  virtual std::size_t dim_x() const noexcept = 0;
  virtual std::size_t dim_y() const noexcept = 0;

  /// out (length M) = G_j(x)
  void inner_value(std::size_t j, std::span<const double> x, std::span<double> out) const;
  Vector inner_value(std::size_t j, std::span<const double> x) const;

  /// out (reshaped to M x N) = grad G_j(x)
  void inner_jacobian(std::size_t j, std::span<const double> x, Matrix& out) const;
  Matrix inner_jacobian(std::size_t j, std::span<const double> x) const;

  double outer_value(std::size_t i, std::span<const double> y) const;

  /// out (length M) = grad F_i(y)
  void outer_gradient(std::size_t i, std::span<const double> y, std::span<double> out) const;
  Vector outer_gradient(std::size_t i, std::span<const double> y) const;

 protected:
  void check_x(std::span<const double> x) const;
  void check_y(std::span<const double> y) const;

 private:
  virtual void do_inner_value(std::size_t j, std::span<const double> x,
                              std::span<double> out) const = 0;
  // `out` is already M x N; every entry must be written.
  virtual void do_inner_jacobian(std::size_t j, std::span<const double> x, Matrix& out) const = 0;
  virtual double do_outer_value(std::size_t i, std::span<const double> y) const = 0;
  virtual void do_outer_gradient(std::size_t i, std::span<const double> y,
                                 std::span<double> out) const = 0;

  friend class CountedProblem;
};

// ---------------------------------------------------------------------------
// Full-batch evaluation.

/// (1/n2) sum_j G_j(x); n2 inner-value queries.
Vector full_inner_value(const CompositionProblem& p, std::span<const double> x);
/// (1/n2) sum_j grad G_j(x); n2 inner-Jacobian queries.
Matrix full_inner_jacobian(const CompositionProblem& p, std::span<const double> x);
/// (1/|idx|) sum_{i in idx} grad F_i(y); |idx| outer-gradient queries.
Vector mean_outer_gradient(const CompositionProblem& p, std::span<const double> y,
                           std::span<const std::size_t> indices);
/// (1/n1) sum_i grad F_i(y); n1 outer-gradient queries.
Vector full_outer_gradient(const CompositionProblem& p, std::span<const double> y);

/// Inner value, inner Jacobian and composite gradient at one point.
struct FullEvaluation {
  Vector inner_value;     // G(x), length M
  Matrix inner_jacobian;  // grad G(x), M x N
  Vector gradient;        // grad f(x), length N
};

/// n2 + n2 + n1 queries, in that order.
FullEvaluation full_evaluation(const CompositionProblem& p, std::span<const double> x);

/// grad f(x) = grad G(x)^T (1/n1) sum_i grad F_i(G(x)).
Vector full_gradient(const CompositionProblem& p, std::span<const double> x);

/// (1/n1) sum_i F_i(G(x)).
double objective_f(const CompositionProblem& p, std::span<const double> x);

// ---------------------------------------------------------------------------
// Mean-variance portfolio.

/// Rewards r_t (rows of an n x N matrix), embedded with
///   G_j(x)    = (x, <r_j, x>)              in R^{N+1}
///   F_i(w, z) = -<r_i, w> + (<r_i, w> - z)^2
/// so that f(x) = -mean_t <r_t, x> + mean_t (<r_t, x> - mean_s <r_s, x>)^2.
class PortfolioProblem final : public CompositionProblem {
 public:
  /// Throws DomainError on an empty matrix or any reward <= 0.
  explicit PortfolioProblem(Matrix rewards);

  std::string_view kind() const noexcept override { return "portfolio"; }
  std::size_t n1() const noexcept override { return rewards_.rows(); }
  std::size_t n2() const noexcept override { return rewards_.rows(); }
  std::size_t dim_x() const noexcept override { return rewards_.cols(); }
  std::size_t dim_y() const noexcept override { return rewards_.cols() + 1; }

  const Matrix& rewards() const noexcept { return rewards_; }

 private:
  void do_inner_value(std::size_t j, std::span<const double> x,
                      std::span<double> out) const override;
  void do_inner_jacobian(std::size_t j, std::span<const double> x, Matrix& out) const override;
  double do_outer_value(std::size_t i, std::span<const double> y) const override;
  void do_outer_gradient(std::size_t i, std::span<const double> y,
                         std::span<double> out) const override;

  Matrix rewards_;
};

PortfolioProblem make_portfolio(Matrix rewards);

// ---------------------------------------------------------------------------
// Policy evaluation through the Bellman residual.

/// Tabular value function x = V in R^S for a fixed policy with averaged
/// transitions P (row-stochastic) and rewards R(s, s'):
///   G_j(x)    = (x, b_j(x)),  b_j(x)_s = S P(s, j) (R(s, j) + gamma x_j)
///   F_i(w, t) = (w_i - t_i)^2
/// so (1/S) sum_j G_j(x) = (x, T x) with T the Bellman operator and
/// f(x) = (1/S) ||x - T x||^2.
class PolicyEvalProblem final : public CompositionProblem {
 public:
  /// Throws DomainError unless P is square, positive, with rows summing to 1
  /// within 1e-9, R matches P's shape and 0 < gamma < 1.
  PolicyEvalProblem(Matrix transitions, Matrix rewards, double gamma);

  std::string_view kind() const noexcept override { return "policy_eval"; }
  std::size_t n1() const noexcept override { return transitions_.rows(); }
  std::size_t n2() const noexcept override { return transitions_.rows(); }
  std::size_t dim_x() const noexcept override { return transitions_.rows(); }
  std::size_t dim_y() const noexcept override { return 2 * transitions_.rows(); }

  std::size_t num_states() const noexcept { return transitions_.rows(); }
  const Matrix& transitions() const noexcept { return transitions_; }
  const Matrix& rewards() const noexcept { return rewards_; }
  double gamma() const noexcept { return gamma_; }

  /// rbar_s = sum_{s'} P(s, s') R(s, s')
  Vector expected_rewards() const;
  /// (T x)_s = sum_{s'} P(s, s') (R(s, s') + gamma x_{s'})
  Vector bellman_operator(std::span<const double> x) const;
  /// (I - gamma P)^{-1} rbar, by LU factorization.
  Vector exact_value_function() const;

 private:
  void do_inner_value(std::size_t j, std::span<const double> x,
                      std::span<double> out) const override;
  void do_inner_jacobian(std::size_t j, std::span<const double> x, Matrix& out) const override;
  double do_outer_value(std::size_t i, std::span<const double> y) const override;
  void do_outer_gradient(std::size_t i, std::span<const double> y,
                         std::span<double> out) const override;

  Matrix transitions_;
  Matrix rewards_;
  double gamma_;
};

inline constexpr double kDefaultDiscount = 0.95;

PolicyEvalProblem make_policy_eval(Matrix transitions, Matrix rewards,
                                   double gamma = kDefaultDiscount);

// ---------------------------------------------------------------------------
// Linear inner map, quadratic outer map.

/// G_j(x) = Q_j x + c_j, F_i(y) = 0.5 ||y - b_i||^2. The composite is the
/// quadratic f(x) = 0.5 ||Qbar x + cbar - bbar||^2 + const.
class LinQuadProblem final : public CompositionProblem {
 public:
  /// Throws DomainError on empty lists or inconsistent shapes.
  LinQuadProblem(std::vector<Matrix> inner_maps, std::vector<Vector> inner_offsets,
                 std::vector<Vector> outer_targets);

  std::string_view kind() const noexcept override { return "linquad"; }
  std::size_t n1() const noexcept override { return targets_.size(); }
  std::size_t n2() const noexcept override { return maps_.size(); }
  std::size_t dim_x() const noexcept override { return maps_.front().cols(); }
  std::size_t dim_y() const noexcept override { return maps_.front().rows(); }

  const std::vector<Matrix>& inner_maps() const noexcept { return maps_; }
  const std::vector<Vector>& inner_offsets() const noexcept { return offsets_; }
  const std::vector<Vector>& outer_targets() const noexcept { return targets_; }

  const Matrix& mean_map() const noexcept { return mean_map_; }
  /// Hessian of f: Qbar^T Qbar.
  Matrix hessian() const;
  /// Minimizer of f (minimum-norm least-squares solution).
  Vector closed_form_optimum() const;
  /// f at its minimizer.
  double optimal_value() const;

  /// Constants for the region ||x|| <= radius: mu = lambda_min(Qbar^T Qbar),
  /// L_f = max_j ||Q_j|| ||Qbar||, L_F = 1, L_G = 0, B_G = max_j ||Q_j||,
  /// B_F = ||Qbar|| radius + max_i ||cbar - b_i||.
  ProblemConstants constants(double radius) const;

 private:
  void do_inner_value(std::size_t j, std::span<const double> x,
                      std::span<double> out) const override;
  void do_inner_jacobian(std::size_t j, std::span<const double> x, Matrix& out) const override;
  double do_outer_value(std::size_t i, std::span<const double> y) const override;
  void do_outer_gradient(std::size_t i, std::span<const double> y,
                         std::span<double> out) const override;

  std::vector<Matrix> maps_;
  std::vector<Vector> offsets_;
  std::vector<Vector> targets_;
  Matrix mean_map_;
  Vector mean_offset_;
  Vector mean_target_;
};

// ---------------------------------------------------------------------------
// Plain finite sums (Prox-SVRG's problem class).

/// (1/n) sum_i f_i(x).
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual std::string_view kind() const noexcept = 0;
  virtual std::size_t n() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;

  double comp_value(std::size_t i, std::span<const double> x) const;
  void comp_gradient(std::size_t i, std::span<const double> x, std::span<double> out) const;
  Vector comp_gradient(std::size_t i, std::span<const double> x) const;

 private:
  virtual double do_comp_value(std::size_t i, std::span<const double> x) const = 0;
  virtual void do_comp_gradient(std::size_t i, std::span<const double> x,
                                std::span<double> out) const = 0;

  friend class CountedFiniteSum;
};

/// (1/n) sum_i f_i(x).
double finite_sum_value(const FiniteSumProblem& p, std::span<const double> x);
/// (1/n) sum_i grad f_i(x); n gradient queries.
Vector finite_sum_gradient(const FiniteSumProblem& p, std::span<const double> x);

/// f_i(x) = 0.5 (<a_i, x> - y_i)^2.
class LassoProblem final : public FiniteSumProblem {
 public:
  LassoProblem(Matrix design, Vector targets);

  std::string_view kind() const noexcept override { return "lasso"; }
  std::size_t n() const noexcept override { return design_.rows(); }
  std::size_t dim() const noexcept override { return design_.cols(); }

  const Matrix& design() const noexcept { return design_; }
  const Vector& targets() const noexcept { return targets_; }

  /// Largest eigenvalue of A^T A / n (smoothness of the average).
  double smoothness() const;
  /// max_i ||a_i||^2 (smoothness of the worst component).
  double max_component_smoothness() const;

 private:
  double do_comp_value(std::size_t i, std::span<const double> x) const override;
  void do_comp_gradient(std::size_t i, std::span<const double> x,
                        std::span<double> out) const override;

  Matrix design_;
  Vector targets_;
};

LassoProblem make_lasso(Matrix design, Vector targets);

/// Views a finite sum as a composition with n1 = n, n2 = 1, G(x) = x and
/// F_i = f_i, so composition diagnostics apply unchanged. Holds a reference.
class FiniteSumComposition final : public CompositionProblem {
 public:
  explicit FiniteSumComposition(const FiniteSumProblem& base) : base_(base) {}

  std::string_view kind() const noexcept override { return base_.kind(); }
  std::size_t n1() const noexcept override { return base_.n(); }
  std::size_t n2() const noexcept override { return 1; }
  std::size_t dim_x() const noexcept override { return base_.dim(); }
  std::size_t dim_y() const noexcept override { return base_.dim(); }

 private:
  void do_inner_value(std::size_t j, std::span<const double> x,
                      std::span<double> out) const override;
  void do_inner_jacobian(std::size_t j, std::span<const double> x, Matrix& out) const override;
  double do_outer_value(std::size_t i, std::span<const double> y) const override;
  void do_outer_gradient(std::size_t i, std::span<const double> y,
                         std::span<double> out) const override;

  const FiniteSumProblem& base_;
};

// ---------------------------------------------------------------------------
// Synthetic data generators.

/// Gaussian reward model N(mean, C), C = Q diag(lambda) Q^T with Q a random
/// orthogonal matrix and lambda geometrically spaced from 1 to kappa_cov.
struct RewardModel {
  Vector mean;
  Vector eigenvalues;
  Matrix covariance;
  Matrix factor;  // Q diag(sqrt(lambda)); covariance = factor factor^T
};

inline constexpr double kRewardMean = 1.0;

/// Throws DomainError if kappa_cov < 1 or N == 0.
RewardModel make_reward_model(std::size_t N, double kappa_cov, RngStream& rng);

/// n draws from the model, mapped through |.| so every reward is positive.
Matrix sample_rewards(const RewardModel& model, std::size_t n, RngStream& rng);

/// make_reward_model followed by sample_rewards on the same stream.
Matrix gen_gaussian_rewards(std::size_t n, std::size_t N, double kappa_cov, RngStream& rng);

struct MdpData {
  Matrix transitions;  // policy-averaged, row-stochastic
  Matrix rewards;      // R(s, s') ~ U[0, 1]
  double min_raw_entry = 0.0;  // smallest shifted entry before normalization
};

inline constexpr double kTransitionShift = 1e-5;

/// Per action, transitions U[0,1] + 1e-5 then row-normalized; averaged under
/// the uniform policy. Throws DomainError if S < 2 or num_actions < 1.
MdpData gen_mdp(std::size_t S, std::size_t num_actions, RngStream& rng);

struct LinQuadSpec {
  std::size_t n1 = 20;
  std::size_t n2 = 20;
  std::size_t dim_y = 10;
  std::size_t dim_x = 10;
  double map_noise = 0.1;     // spread of Q_j around a common map
  double target_noise = 1.0;  // spread of c_j and b_i
  double map_scale = 1.0;     // scale of the common map
};

/// Q_j = map_scale (Q0 + map_noise E_j) with Q0, E_j Gaussian / sqrt(dim_y);
/// c_j, b_i Gaussian scaled by target_noise.
LinQuadProblem gen_linquad(const LinQuadSpec& spec, RngStream& rng);

/// Gaussian design (n x N), a sparse ground truth with about a quarter of
/// its entries nonzero, targets = A w + noise * e.
LassoProblem gen_lasso(std::size_t n, std::size_t N, double noise, RngStream& rng);

}  // namespace composolve
