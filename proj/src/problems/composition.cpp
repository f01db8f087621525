#include <string>

#include "composolve/errors.hpp"
#include "composolve/problems.hpp"

namespace composolve {
namespace {

[[noreturn]] void bad_index(const char* what, std::size_t index, std::size_t bound) {
  throw DomainError(std::string(what) + ": index " + std::to_string(index) +
                    " out of range [0, " + std::to_string(bound) + ")");
}

}  // namespace

void CompositionProblem::check_x(std::span<const double> x) const {
  if (x.size() != dim_x()) {
    throw DomainError("composition problem: x has length " + std::to_string(x.size()) +
                      ", expected " + std::to_string(dim_x()));
  }
}

void CompositionProblem::check_y(std::span<const double> y) const {
  if (y.size() != dim_y()) {
    throw DomainError("composition problem: y has length " + std::to_string(y.size()) +
                      ", expected " + std::to_string(dim_y()));
  }
}

void CompositionProblem::inner_value(std::size_t j, std::span<const double> x,
                                     std::span<double> out) const {
  if (j >= n2()) bad_index("inner_value", j, n2());
  check_x(x);
  check_y(out);
  do_inner_value(j, x, out);
}

Vector CompositionProblem::inner_value(std::size_t j, std::span<const double> x) const {
  Vector out(dim_y());
  inner_value(j, x, out.span());
  return out;
}

void CompositionProblem::inner_jacobian(std::size_t j, std::span<const double> x,
                                        Matrix& out) const {
  if (j >= n2()) bad_index("inner_jacobian", j, n2());
  check_x(x);
  if (out.rows() != dim_y() || out.cols() != dim_x()) out.assign_zero(dim_y(), dim_x());
  do_inner_jacobian(j, x, out);
}

Matrix CompositionProblem::inner_jacobian(std::size_t j, std::span<const double> x) const {
  Matrix out(dim_y(), dim_x());
  inner_jacobian(j, x, out);
  return out;
}

double CompositionProblem::outer_value(std::size_t i, std::span<const double> y) const {
  if (i >= n1()) bad_index("outer_value", i, n1());
  check_y(y);
  return do_outer_value(i, y);
}

void CompositionProblem::outer_gradient(std::size_t i, std::span<const double> y,
                                        std::span<double> out) const {
  if (i >= n1()) bad_index("outer_gradient", i, n1());
  check_y(y);
  check_y(out);
  do_outer_gradient(i, y, out);
}

Vector CompositionProblem::outer_gradient(std::size_t i, std::span<const double> y) const {
  Vector out(dim_y());
  outer_gradient(i, y, out.span());
  return out;
}

Vector full_inner_value(const CompositionProblem& p, std::span<const double> x) {
  Vector sum(p.dim_y());
  Vector term(p.dim_y());
  for (std::size_t j = 0; j < p.n2(); ++j) {
    p.inner_value(j, x, term.span());
    axpy(1.0, term, sum.span());
  }
  scale(1.0 / static_cast<double>(p.n2()), sum.span());
  return sum;
}

Matrix full_inner_jacobian(const CompositionProblem& p, std::span<const double> x) {
  Matrix sum(p.dim_y(), p.dim_x());
  Matrix term(p.dim_y(), p.dim_x());
  for (std::size_t j = 0; j < p.n2(); ++j) {
    p.inner_jacobian(j, x, term);
    axpy(1.0, term.flat(), sum.flat());
  }
  scale(1.0 / static_cast<double>(p.n2()), sum.flat());
  return sum;
}

Vector mean_outer_gradient(const CompositionProblem& p, std::span<const double> y,
                           std::span<const std::size_t> indices) {
  if (indices.empty()) throw DomainError("mean_outer_gradient: empty index set");
  Vector sum(p.dim_y());
  Vector term(p.dim_y());
  for (std::size_t i : indices) {
    p.outer_gradient(i, y, term.span());
    axpy(1.0, term, sum.span());
  }
  scale(1.0 / static_cast<double>(indices.size()), sum.span());
  return sum;
}

Vector full_outer_gradient(const CompositionProblem& p, std::span<const double> y) {
  Vector sum(p.dim_y());
  Vector term(p.dim_y());
  for (std::size_t i = 0; i < p.n1(); ++i) {
    p.outer_gradient(i, y, term.span());
    axpy(1.0, term, sum.span());
  }
  scale(1.0 / static_cast<double>(p.n1()), sum.span());
  return sum;
}

FullEvaluation full_evaluation(const CompositionProblem& p, std::span<const double> x) {
  FullEvaluation eval;
  eval.inner_value = full_inner_value(p, x);
  eval.inner_jacobian = full_inner_jacobian(p, x);
  const Vector outer = full_outer_gradient(p, eval.inner_value);
  eval.gradient = Vector(p.dim_x());
  matvec_transposed(eval.inner_jacobian, outer, eval.gradient.span());
  return eval;
}

Vector full_gradient(const CompositionProblem& p, std::span<const double> x) {
  return full_evaluation(p, x).gradient;
}

double objective_f(const CompositionProblem& p, std::span<const double> x) {
  const Vector g = full_inner_value(p, x);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.n1(); ++i) sum += p.outer_value(i, g);
  return sum / static_cast<double>(p.n1());
}

}  // namespace composolve
