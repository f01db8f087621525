#include "composolve/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "composolve/errors.hpp"

namespace composolve {

double objective_H(const CompositionProblem& p, const Regularizer& h, std::span<const double> x) {
  return objective_f(p, x) + h.value(x);
}

Vector gradient_mapping_from(const Regularizer& h, std::span<const double> x,
                             std::span<const double> grad_f, double eta) {
  if (!(eta > 0.0)) throw DomainError("gradient_mapping: eta must be positive");
  if (x.size() != grad_f.size()) throw DomainError("gradient_mapping: length mismatch");
  if (h.is_zero()) {
    Vector out(grad_f.size());
    std::copy(grad_f.begin(), grad_f.end(), out.begin());
    return out;
  }

  Vector step(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) step[k] = x[k] - eta * grad_f[k];
  h.prox_into(step, eta, step.span());
  Vector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - step[k]) / eta;
  return out;
}

Vector gradient_mapping(const CompositionProblem& p, const Regularizer& h,
                        std::span<const double> x, double eta) {
  const Vector grad = full_gradient(p, x);
  return gradient_mapping_from(h, x, grad, eta);
}

double grad_map_sq(const CompositionProblem& p, const Regularizer& h, std::span<const double> x,
                   double eta) {
  return l2_norm_sq(gradient_mapping(p, h, x, eta));
}

double composite_grad_sq_from(const Regularizer& h, std::span<const double> x,
                              std::span<const double> grad_f) {
  const Vector g = h.min_norm_subgradient(x, grad_f);
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double c = grad_f[k] + g[k];
    acc += c * c;
  }
  return acc;
}

double composite_grad_sq(const CompositionProblem& p, const Regularizer& h,
                         std::span<const double> x) {
  const Vector grad = full_gradient(p, x);
  return composite_grad_sq_from(h, x, grad);
}

ReferenceOptimum certify_optimum(const CompositionProblem& p, const Regularizer& h, Vector x,
                                 double eta) {
  ReferenceOptimum ref;
  ref.objective = objective_H(p, h, x);
  ref.residual = std::sqrt(grad_map_sq(p, h, x, eta));
  ref.eta = eta;
  ref.verified = std::isfinite(ref.residual) && ref.residual <= kOptimumTolerance;
  ref.x = std::move(x);
  return ref;
}

GapResult objective_gap(const CompositionProblem& p, const Regularizer& h,
                        std::span<const double> x, const ReferenceOptimum& x_star) {
  return {objective_H(p, h, x) - x_star.objective, x_star.verified};
}

Diagnostics evaluate_diagnostics(const CompositionProblem& p, const Regularizer& h,
                                 std::span<const double> x, double eta,
                                 const ReferenceOptimum* x_star) {
  Diagnostics d;
  const FullEvaluation eval = full_evaluation(p, x);
  double outer = 0.0;
  for (std::size_t i = 0; i < p.n1(); ++i) outer += p.outer_value(i, eval.inner_value);
  d.objective = outer / static_cast<double>(p.n1()) + h.value(x);
  if (x_star != nullptr) d.gap = d.objective - x_star->objective;
  d.grad_map_sq = l2_norm_sq(gradient_mapping_from(h, x, eval.gradient, eta));
  d.composite_grad_sq = composite_grad_sq_from(h, x, eval.gradient);
  return d;
}

double trace_min_grad_map_sq(const std::vector<TraceRecord>& trace) {
  double best = std::numeric_limits<double>::infinity();
  for (const TraceRecord& r : trace) best = std::min(best, r.grad_map_sq);
  return best;
}

}  // namespace composolve
