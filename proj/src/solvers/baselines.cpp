#include <cmath>

#include "composolve/solvers.hpp"
#include "monitor.hpp"

namespace composolve {

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::completed: return "completed";
    case StopReason::converged: return "converged";
    case StopReason::query_budget: return "query_budget";
    case StopReason::wall_budget: return "wall_budget";
  }
  return "unknown";
}

void ScpgConfig::validate(const CompositionProblem& p) const {
  if (!(alpha0 > 0.0) || !(beta0 > 0.0) || !std::isfinite(alpha0) || !std::isfinite(beta0)) {
    throw DomainError("scpg: alpha0 and beta0 must be positive");
  }
  // Zero exponents give constant schedules.
  if (!(exp_alpha >= 0.0 && exp_alpha <= 1.0) || !(exp_beta >= 0.0 && exp_beta <= 1.0)) {
    throw DomainError("scpg: exponents must lie in [0, 1]");
  }
  if (beta0 > 1.0) throw DomainError("scpg: beta0 must not exceed 1");
  if (iters == 0) throw DomainError("scpg: iters must be at least 1");
  if (x0 && x0->size() != p.dim_x()) throw DomainError("scpg: x0 has the wrong length");
  if (y0 && y0->size() != p.dim_y()) throw DomainError("scpg: y0 has the wrong length");
}

SolveResult scpg_baseline(const CompositionProblem& p, const Regularizer& h,
                          const ScpgConfig& cfg, const TraceOptions& opts) {
  cfg.validate(p);
  auto counter = std::make_shared<QueryCounter>();
  const CountedProblem cp(p, counter);
  detail::RunMonitor mon(p, h, opts, cfg.alpha0, counter);
  RngStream rng(cfg.seed);

  Vector x = cfg.x0 ? *cfg.x0 : Vector(p.dim_x());
  Vector y = cfg.y0 ? *cfg.y0 : Vector(p.dim_y());
  if (!x.all_finite() || !y.all_finite()) throw DomainError("scpg: x0 and y0 must be finite");
  Vector x_prev(p.dim_x());
  Vector gj(p.dim_y());
  Matrix jac(p.dim_y(), p.dim_x());
  Vector outer(p.dim_y());
  Vector step(p.dim_x());
  const QueryCounts unit = scpg_counts(1);

  mon.record(0, 0, x);
  mon.keep(x);
  for (std::uint64_t t = 0; t < cfg.iters; ++t) {
    if (!mon.affordable(unit) || mon.out_of_time()) {
      const StopReason why = mon.affordable(unit) ? StopReason::wall_budget : StopReason::query_budget;
      if (!mon.last_row_is(0, t)) mon.record(0, t, x);
      return mon.finish(std::move(x), why, 0, t);
    }
    const double tt = static_cast<double>(t);
    const double alpha = cfg.alpha0 / std::pow(1.0 + tt, cfg.exp_alpha);
    const double beta = cfg.beta0 / std::pow(1.0 + tt, cfg.exp_beta);
    const std::size_t j = rng.next_index(p.n2());
    const std::size_t i = rng.next_index(p.n1());

    cp.inner_value(j, x, gj.span());
    axpby(beta, gj, 1.0 - beta, y.span());
    cp.inner_jacobian(j, x, jac);
    cp.outer_gradient(i, y, outer.span());
    matvec_transposed(jac, outer, step.span());

    x_prev = x;
    axpy(-alpha, step, x.span());
    h.prox_into(x, alpha, x.span());
    if (!x.all_finite() || !y.all_finite()) mon.diverge("scpg", std::move(x_prev), 0, t);
    mon.keep(x);
    if (mon.due(t + 1, cfg.iters)) mon.record(0, t + 1, x);
  }
  return mon.finish(std::move(x), StopReason::completed, 0, cfg.iters);
}

void ProxSvrgConfig::validate(const FiniteSumProblem& p) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("prox_svrg: eta must be positive");
  if (m == 0 || epochs == 0) throw DomainError("prox_svrg: m and epochs must be at least 1");
  if (x0 && x0->size() != p.dim()) throw DomainError("prox_svrg: x0 has the wrong length");
}

SolveResult prox_svrg(const FiniteSumProblem& p, const Regularizer& h, const ProxSvrgConfig& cfg,
                      const TraceOptions& opts) {
  cfg.validate(p);
  auto counter = std::make_shared<QueryCounter>();
  const CountedFiniteSum cp(p, counter);
  const FiniteSumComposition view(p);
  detail::RunMonitor mon(view, h, opts, cfg.eta, counter);
  RngStream rng(cfg.seed);

  Vector x = cfg.x0 ? *cfg.x0 : Vector(p.dim());
  if (!x.all_finite()) throw DomainError("prox_svrg: x0 must be finite");
  Vector x_prev(p.dim());
  Vector x_tilde(p.dim());
  Vector g_x(p.dim());
  Vector g_tilde(p.dim());
  Vector v(p.dim());
  const QueryCounts full_cost{0, 0, p.n()};
  const QueryCounts inner_cost{0, 0, 2};

  mon.record(0, 0, x);
  mon.keep(x);
  std::uint64_t iterations = 0;
  for (std::uint64_t s = 0; s < cfg.epochs; ++s) {
    if (!mon.affordable(full_cost + inner_cost)) {
      return mon.finish(std::move(x), StopReason::query_budget, s, iterations);
    }
    if (mon.out_of_time()) return mon.finish(std::move(x), StopReason::wall_budget, s, iterations);

    x_tilde = x;
    const Vector f_prime = finite_sum_gradient(cp, x_tilde);
    for (std::uint64_t t = 0; t < cfg.m; ++t) {
      if (t > 0 && (!mon.affordable(inner_cost) || mon.out_of_time())) {
        const StopReason why =
            mon.affordable(inner_cost) ? StopReason::wall_budget : StopReason::query_budget;
        if (!mon.last_row_is(s, t)) mon.record(s, t, x);
        return mon.finish(std::move(x), why, s, iterations);
      }
      const std::size_t i = rng.next_index(p.n());
      cp.comp_gradient(i, x, g_x.span());
      cp.comp_gradient(i, x_tilde, g_tilde.span());
      subtract(g_x, g_tilde, v.span());
      axpy(1.0, f_prime, v.span());

      x_prev = x;
      axpy(-cfg.eta, v, x.span());
      h.prox_into(x, cfg.eta, x.span());
      ++iterations;
      if (!x.all_finite()) mon.diverge("prox_svrg", std::move(x_prev), s, iterations - 1);
      mon.keep(x);
      if (mon.due(t + 1, cfg.m)) mon.record(s, t + 1, x);
    }
  }
  return mon.finish(std::move(x), StopReason::completed, cfg.epochs, iterations);
}

void ProxFullGradientConfig::validate(const CompositionProblem& p) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw DomainError("prox_full_gradient: eta must be positive");
  }
  if (iters == 0) throw DomainError("prox_full_gradient: iters must be at least 1");
  if (!(tol >= 0.0)) throw DomainError("prox_full_gradient: tol must be nonnegative");
  if (x0 && x0->size() != p.dim_x()) {
    throw DomainError("prox_full_gradient: x0 has the wrong length");
  }
}

SolveResult prox_full_gradient(const CompositionProblem& p, const Regularizer& h,
                               const ProxFullGradientConfig& cfg, const TraceOptions& opts) {
  cfg.validate(p);
  auto counter = std::make_shared<QueryCounter>();
  const CountedProblem cp(p, counter);
  detail::RunMonitor mon(p, h, opts, cfg.eta, counter);

  Vector x = cfg.x0 ? *cfg.x0 : Vector(p.dim_x());
  if (!x.all_finite()) throw DomainError("prox_full_gradient: x0 must be finite");
  Vector x_prev(p.dim_x());
  const QueryCounts unit = snapshot_counts(p.n1(), p.n2());
  const std::size_t stride = opts.stride;

  mon.record(0, 0, x);
  mon.keep(x);
  for (std::uint64_t t = 0; t < cfg.iters; ++t) {
    if (!mon.affordable(unit) || mon.out_of_time()) {
      const StopReason why = mon.affordable(unit) ? StopReason::wall_budget : StopReason::query_budget;
      if (!mon.last_row_is(t, 0)) mon.record(t, 0, x);
      return mon.finish(std::move(x), why, t, t);
    }
    const Vector grad = full_gradient(cp, x);
    x_prev = x;
    axpy(-cfg.eta, grad, x.span());
    h.prox_into(x, cfg.eta, x.span());
    if (!x.all_finite()) mon.diverge("prox_full_gradient", std::move(x_prev), t, t);
    mon.keep(x);
    const double delta = std::sqrt([&] {
      double acc = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) acc += (x[k] - x_prev[k]) * (x[k] - x_prev[k]);
      return acc;
    }());
    const bool done = delta <= cfg.tol;
    if (done || t + 1 == cfg.iters || (stride > 0 && (t + 1) % stride == 0)) {
      mon.record(t + 1, 0, x);
    }
    if (done) return mon.finish(std::move(x), StopReason::converged, t + 1, t + 1);
  }
  return mon.finish(std::move(x), StopReason::completed, cfg.iters, cfg.iters);
}

}  // namespace composolve
