#include <algorithm>
#include <string>

#include "composolve/errors.hpp"
#include "composolve/problems.hpp"
#include "dense_linalg.hpp"

namespace composolve {
namespace {

void check_component(const FiniteSumProblem& p, std::size_t i, std::span<const double> x) {
  if (i >= p.n()) {
    throw DomainError("finite sum: component " + std::to_string(i) + " out of range");
  }
  if (x.size() != p.dim()) throw DomainError("finite sum: x has the wrong length");
}

}  // namespace

double FiniteSumProblem::comp_value(std::size_t i, std::span<const double> x) const {
  check_component(*this, i, x);
  return do_comp_value(i, x);
}

void FiniteSumProblem::comp_gradient(std::size_t i, std::span<const double> x,
                                     std::span<double> out) const {
  check_component(*this, i, x);
  if (out.size() != dim()) throw DomainError("finite sum: gradient buffer has the wrong length");
  do_comp_gradient(i, x, out);
}

Vector FiniteSumProblem::comp_gradient(std::size_t i, std::span<const double> x) const {
  Vector out(dim());
  comp_gradient(i, x, out.span());
  return out;
}

double finite_sum_value(const FiniteSumProblem& p, std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) sum += p.comp_value(i, x);
  return sum / static_cast<double>(p.n());
}

Vector finite_sum_gradient(const FiniteSumProblem& p, std::span<const double> x) {
  Vector sum(p.dim());
  Vector term(p.dim());
  for (std::size_t i = 0; i < p.n(); ++i) {
    p.comp_gradient(i, x, term.span());
    axpy(1.0, term, sum.span());
  }
  scale(1.0 / static_cast<double>(p.n()), sum.span());
  return sum;
}

LassoProblem::LassoProblem(Matrix design, Vector targets)
    : design_(std::move(design)), targets_(std::move(targets)) {
  if (design_.rows() == 0 || design_.cols() == 0) throw DomainError("lasso: empty design");
  if (targets_.size() != design_.rows()) {
    throw DomainError("lasso: one target per design row required");
  }
}

double LassoProblem::do_comp_value(std::size_t i, std::span<const double> x) const {
  const double r = dot(design_.row(i), x) - targets_[i];
  return 0.5 * r * r;
}

void LassoProblem::do_comp_gradient(std::size_t i, std::span<const double> x,
                                    std::span<double> out) const {
  const auto a = design_.row(i);
  const double r = dot(a, x) - targets_[i];
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = r * a[k];
}

double LassoProblem::smoothness() const {
  const Eigen::MatrixXd a = detail::as_eigen(design_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.transpose() * a /
                                                     static_cast<double>(design_.rows()));
  return eig.eigenvalues().maxCoeff();
}

double LassoProblem::max_component_smoothness() const {
  double m = 0.0;
  for (std::size_t i = 0; i < design_.rows(); ++i) m = std::max(m, l2_norm_sq(design_.row(i)));
  return m;
}

LassoProblem make_lasso(Matrix design, Vector targets) {
  return LassoProblem(std::move(design), std::move(targets));
}

void FiniteSumComposition::do_inner_value(std::size_t /*j*/, std::span<const double> x,
                                          std::span<double> out) const {
  std::copy(x.begin(), x.end(), out.begin());
}

void FiniteSumComposition::do_inner_jacobian(std::size_t /*j*/, std::span<const double> /*x*/,
                                             Matrix& out) const {
  out.fill(0.0);
  for (std::size_t k = 0; k < out.rows(); ++k) out(k, k) = 1.0;
}

double FiniteSumComposition::do_outer_value(std::size_t i, std::span<const double> y) const {
  return base_.comp_value(i, y);
}

void FiniteSumComposition::do_outer_gradient(std::size_t i, std::span<const double> y,
                                             std::span<double> out) const {
  base_.comp_gradient(i, y, out);
}

}  // namespace composolve
