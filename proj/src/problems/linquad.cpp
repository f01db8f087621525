#include <algorithm>

#include "composolve/errors.hpp"
#include "composolve/problems.hpp"
#include "dense_linalg.hpp"

namespace composolve {

LinQuadProblem::LinQuadProblem(std::vector<Matrix> inner_maps, std::vector<Vector> inner_offsets,
                               std::vector<Vector> outer_targets)
    : maps_(std::move(inner_maps)),
      offsets_(std::move(inner_offsets)),
      targets_(std::move(outer_targets)) {
  if (maps_.empty() || targets_.empty()) {
    throw DomainError("linquad: need at least one inner and one outer component");
  }
  if (offsets_.size() != maps_.size()) {
    throw DomainError("linquad: one offset per inner map required");
  }
  const std::size_t M = maps_.front().rows();
  const std::size_t N = maps_.front().cols();
  if (M == 0 || N == 0) throw DomainError("linquad: empty inner map");
  for (std::size_t j = 0; j < maps_.size(); ++j) {
    if (maps_[j].rows() != M || maps_[j].cols() != N || offsets_[j].size() != M) {
      throw DomainError("linquad: inconsistent inner component shapes");
    }
  }
  for (const Vector& b : targets_) {
    if (b.size() != M) throw DomainError("linquad: outer target length must equal M");
  }

  mean_map_ = Matrix(M, N);
  mean_offset_ = Vector(M);
  mean_target_ = Vector(M);
  for (std::size_t j = 0; j < maps_.size(); ++j) {
    axpy(1.0, maps_[j].flat(), mean_map_.flat());
    axpy(1.0, offsets_[j], mean_offset_.span());
  }
  scale(1.0 / static_cast<double>(maps_.size()), mean_map_.flat());
  scale(1.0 / static_cast<double>(maps_.size()), mean_offset_.span());
  for (const Vector& b : targets_) axpy(1.0, b, mean_target_.span());
  scale(1.0 / static_cast<double>(targets_.size()), mean_target_.span());
}

void LinQuadProblem::do_inner_value(std::size_t j, std::span<const double> x,
                                    std::span<double> out) const {
  matvec(maps_[j], x, out);
  axpy(1.0, offsets_[j], out);
}

void LinQuadProblem::do_inner_jacobian(std::size_t j, std::span<const double> /*x*/,
                                       Matrix& out) const {
  const auto src = maps_[j].flat();
  std::copy(src.begin(), src.end(), out.flat().begin());
}

double LinQuadProblem::do_outer_value(std::size_t i, std::span<const double> y) const {
  double acc = 0.0;
  const Vector& b = targets_[i];
  for (std::size_t k = 0; k < y.size(); ++k) acc += (y[k] - b[k]) * (y[k] - b[k]);
  return 0.5 * acc;
}

void LinQuadProblem::do_outer_gradient(std::size_t i, std::span<const double> y,
                                       std::span<double> out) const {
  subtract(y, targets_[i], out);
}

Matrix LinQuadProblem::hessian() const {
  const auto q = detail::as_eigen(mean_map_);
  return detail::from_eigen(Eigen::MatrixXd(q.transpose() * q));
}

Vector LinQuadProblem::closed_form_optimum() const {
  const Eigen::MatrixXd q = detail::as_eigen(mean_map_);
  Eigen::VectorXd rhs = detail::as_eigen(mean_target_.span()) - detail::as_eigen(mean_offset_.span());
  const Eigen::VectorXd x = q.completeOrthogonalDecomposition().solve(rhs);
  return detail::from_eigen(x);
}

double LinQuadProblem::optimal_value() const {
  return objective_f(*this, closed_form_optimum());
}

ProblemConstants LinQuadProblem::constants(double radius) const {
  const Eigen::MatrixXd q = detail::as_eigen(mean_map_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q.transpose() * q);
  const double mean_norm = detail::spectral_norm(mean_map_);
  double max_norm = 0.0;
  for (const Matrix& m : maps_) max_norm = std::max(max_norm, detail::spectral_norm(m));
  double max_offset = 0.0;
  for (const Vector& b : targets_) max_offset = std::max(max_offset, l2_norm((mean_offset_ - b)));

  ProblemConstants c;
  c.mu = eig.eigenvalues()(0);
  c.L_f = max_norm * mean_norm;
  c.L_F = 1.0;
  c.L_G = 0.0;
  c.B_G = max_norm;
  c.B_F = mean_norm * radius + max_offset;
  return c;
}

}  // namespace composolve
