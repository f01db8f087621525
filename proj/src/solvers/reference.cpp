#include <cmath>

#include "composolve/solvers.hpp"

namespace composolve {

double estimate_smoothness(const CompositionProblem& p, std::span<const double> x,
                           std::size_t iterations, std::uint64_t seed) {
  if (x.size() != p.dim_x()) throw DomainError("estimate_smoothness: x has the wrong length");
  RngStream rng(seed);
  Vector v = random_normal_vector(rng, p.dim_x());
  scale(1.0 / l2_norm(v), v.span());
  const double eps = 1e-2 * std::max(1.0, l2_norm(x));

  Vector plus(p.dim_x()), minus(p.dim_x()), hv(p.dim_x());
  double estimate = 0.0;
  for (std::size_t it = 0; it < std::max<std::size_t>(iterations, 1); ++it) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      plus[k] = x[k] + eps * v[k];
      minus[k] = x[k] - eps * v[k];
    }
    const Vector gp = full_gradient(p, plus);
    const Vector gm = full_gradient(p, minus);
    for (std::size_t k = 0; k < x.size(); ++k) hv[k] = (gp[k] - gm[k]) / (2.0 * eps);
    const double next = std::fabs(dot(v, hv));
    const double norm = l2_norm(hv);
    if (!(norm > 0.0) || !std::isfinite(norm)) return std::max(estimate, next);
    for (std::size_t k = 0; k < x.size(); ++k) v[k] = hv[k] / norm;
    const bool settled = it > 5 && std::fabs(next - estimate) <= 1e-9 * next;
    estimate = next;
    if (settled) break;
  }
  return estimate;
}

ReferenceOptimum compute_reference_optimum(const CompositionProblem& p, const Regularizer& h,
                                           const ReferenceSettings& settings) {
  Vector x(p.dim_x());
  double eta = settings.eta;
  if (!(eta > 0.0)) {
    const double L = estimate_smoothness(p, x);
    if (!(L > 0.0) || !std::isfinite(L)) {
      throw NumericError("compute_reference_optimum: could not estimate the smoothness of f");
    }
    eta = 1.0 / L;
  }

  // Accelerated proximal gradient with gradient-based restarts.
  Vector y = x;
  Vector x_next(p.dim_x());
  double t = 1.0;
  for (std::size_t it = 0; it < settings.accelerated_iters; ++it) {
    const Vector g = full_gradient(p, y);
    for (std::size_t k = 0; k < x.size(); ++k) x_next[k] = y[k] - eta * g[k];
    h.prox_into(x_next, eta, x_next.span());
    if (!x_next.all_finite()) throw NumericError("compute_reference_optimum: diverged");

    double restart = 0.0;
    double delta_sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      restart += (y[k] - x_next[k]) * (x_next[k] - x[k]);
      delta_sq += (x_next[k] - x[k]) * (x_next[k] - x[k]);
    }
    if (restart > 0.0) {
      t = 1.0;
      y = x_next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double w = (t - 1.0) / t_next;
      for (std::size_t k = 0; k < x.size(); ++k) y[k] = x_next[k] + w * (x_next[k] - x[k]);
      t = t_next;
    }
    x = x_next;
    if (std::sqrt(delta_sq) <= settings.tol) break;
  }

  ProxFullGradientConfig polish;
  polish.eta = eta;
  polish.iters = settings.max_iters;
  polish.tol = settings.tol;
  polish.x0 = x;
  TraceOptions quiet;
  quiet.record = false;
  SolveResult r = prox_full_gradient(p, h, polish, quiet);
  return certify_optimum(p, h, std::move(r.x_final), eta);
}

}  // namespace composolve
