#include <algorithm>
#include <cmath>
#include <limits>

#include "composolve/errors.hpp"
#include "composolve/problems.hpp"
#include "dense_linalg.hpp"

namespace composolve {

RewardModel make_reward_model(std::size_t N, double kappa_cov, RngStream& rng) {
  if (N == 0) throw DomainError("make_reward_model: dimension must be positive");
  if (!(kappa_cov >= 1.0) || !std::isfinite(kappa_cov)) {
    throw DomainError("make_reward_model: kappa_cov must be >= 1");
  }
  const auto n = static_cast<Eigen::Index>(N);

  Eigen::MatrixXd gaussian(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) gaussian(r, c) = rng.next_normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  for (Eigen::Index c = 0; c < n; ++c) {
    if (packed(c, c) < 0.0) q.col(c) *= -1.0;  // unique Q with positive diag(R)
  }

  Eigen::VectorXd eigenvalues(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
    eigenvalues(k) = std::pow(kappa_cov, t);
  }
  eigenvalues(0) = 1.0;
  eigenvalues(n - 1) = kappa_cov;

  Eigen::MatrixXd factor = q * eigenvalues.cwiseSqrt().asDiagonal();
  Eigen::MatrixXd covariance = q * eigenvalues.asDiagonal() * q.transpose();
  covariance = 0.5 * (covariance + covariance.transpose()).eval();

  RewardModel model;
  model.mean = Vector(N, kRewardMean);
  model.eigenvalues = detail::from_eigen(eigenvalues);
  model.covariance = detail::from_eigen(covariance);
  model.factor = detail::from_eigen(factor);
  return model;
}

Matrix sample_rewards(const RewardModel& model, std::size_t n, RngStream& rng) {
  const std::size_t N = model.mean.size();
  Matrix rewards(n, N);
  Vector z(N);
  Vector draw(N);
  for (std::size_t t = 0; t < n; ++t) {
    for (auto& v : z) v = rng.next_normal();
    matvec(model.factor, z, draw.span());
    for (std::size_t k = 0; k < N; ++k) rewards(t, k) = std::fabs(model.mean[k] + draw[k]);
  }
  // |.| of a continuous draw is zero with probability zero; guard anyway so
  // the portfolio precondition always holds.
  for (double& r : rewards.flat()) {
    if (r == 0.0) r = std::numeric_limits<double>::min();
  }
  return rewards;
}

Matrix gen_gaussian_rewards(std::size_t n, std::size_t N, double kappa_cov, RngStream& rng) {
  const RewardModel model = make_reward_model(N, kappa_cov, rng);
  return sample_rewards(model, n, rng);
}

MdpData gen_mdp(std::size_t S, std::size_t num_actions, RngStream& rng) {
  if (S < 2) throw DomainError("gen_mdp: need at least two states");
  if (num_actions < 1) throw DomainError("gen_mdp: need at least one action");

  MdpData mdp;
  mdp.transitions = Matrix(S, S);
  mdp.rewards = Matrix(S, S);
  mdp.min_raw_entry = std::numeric_limits<double>::infinity();

  const double policy_weight = 1.0 / static_cast<double>(num_actions);
  std::vector<double> row(S);
  for (std::size_t a = 0; a < num_actions; ++a) {
    for (std::size_t s = 0; s < S; ++s) {
      double total = 0.0;
      for (std::size_t t = 0; t < S; ++t) {
        row[t] = rng.next_uniform() + kTransitionShift;
        mdp.min_raw_entry = std::min(mdp.min_raw_entry, row[t]);
        total += row[t];
      }
      for (std::size_t t = 0; t < S; ++t) mdp.transitions(s, t) += policy_weight * (row[t] / total);
    }
  }
  // Remove the rounding drift of the average so rows sum to 1 to ~1 ulp.
  for (std::size_t s = 0; s < S; ++s) {
    double total = 0.0;
    for (double p : mdp.transitions.row(s)) total += p;
    for (double& p : mdp.transitions.row(s)) p /= total;
  }
  for (double& r : mdp.rewards.flat()) r = rng.next_uniform();
  return mdp;
}

LinQuadProblem gen_linquad(const LinQuadSpec& spec, RngStream& rng) {
  if (spec.n1 == 0 || spec.n2 == 0 || spec.dim_x == 0 || spec.dim_y == 0) {
    throw DomainError("gen_linquad: all sizes must be positive");
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(spec.dim_y));
  Matrix common(spec.dim_y, spec.dim_x);
  for (double& v : common.flat()) v = rng.next_normal() * norm;

  std::vector<Matrix> maps;
  std::vector<Vector> offsets;
  std::vector<Vector> targets;
  maps.reserve(spec.n2);
  for (std::size_t j = 0; j < spec.n2; ++j) {
    Matrix q(spec.dim_y, spec.dim_x);
    for (std::size_t k = 0; k < q.size(); ++k) {
      q.flat()[k] = spec.map_scale * (common.flat()[k] + spec.map_noise * rng.next_normal() * norm);
    }
    maps.push_back(std::move(q));
    Vector c = random_normal_vector(rng, spec.dim_y);
    scale(spec.target_noise, c.span());
    offsets.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < spec.n1; ++i) {
    Vector b = random_normal_vector(rng, spec.dim_y);
    scale(spec.target_noise, b.span());
    targets.push_back(std::move(b));
  }
  return LinQuadProblem(std::move(maps), std::move(offsets), std::move(targets));
}

LassoProblem gen_lasso(std::size_t n, std::size_t N, double noise, RngStream& rng) {
  if (n == 0 || N == 0) throw DomainError("gen_lasso: sizes must be positive");
  Matrix design(n, N);
  for (double& v : design.flat()) v = rng.next_normal();
  Vector truth(N);
  for (auto& w : truth) w = rng.next_uniform() < 0.25 ? rng.next_normal() : 0.0;
  Vector targets(n);
  matvec(design, truth, targets.span());
  for (auto& y : targets) y += noise * rng.next_normal();
  return LassoProblem(std::move(design), std::move(targets));
}

}  // namespace composolve
