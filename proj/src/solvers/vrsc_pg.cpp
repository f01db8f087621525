#include <cmath>
#include <numeric>

#include "composolve/solvers.hpp"
#include "monitor.hpp"

namespace composolve {
namespace {

void check_indices(std::span<const std::size_t> idx, std::size_t bound, const char* what) {
  if (idx.empty()) throw DomainError(std::string(what) + ": empty index set");
  for (std::size_t i : idx) {
    if (i >= bound) throw DomainError(std::string(what) + ": index out of range");
  }
}

void check_snapshot(const Snapshot& snap, const CompositionProblem& p) {
  if (snap.x_tilde.size() != p.dim_x() || snap.G_s.size() != p.dim_y() ||
      snap.J_s.rows() != p.dim_y() || snap.J_s.cols() != p.dim_x() ||
      snap.outer_grad_s.size() != p.dim_y() || snap.grad_f_s.size() != p.dim_x()) {
    throw DomainError("snapshot does not match the problem dimensions");
  }
}

// Scratch buffers reused across inner iterations.
struct Workspace {
  Vector ya, yb, acc_y;
  Matrix ja, jb, acc_j;
  Vector g_hat_mean, g_s_mean, u_hat, u_s;

  explicit Workspace(const CompositionProblem& p)
      : ya(p.dim_y()),
        yb(p.dim_y()),
        acc_y(p.dim_y()),
        ja(p.dim_y(), p.dim_x()),
        jb(p.dim_y(), p.dim_x()),
        acc_j(p.dim_y(), p.dim_x()),
        g_hat_mean(p.dim_y()),
        g_s_mean(p.dim_y()),
        u_hat(p.dim_x()),
        u_s(p.dim_x()) {}
};

void inner_value_into(const Snapshot& snap, const CompositionProblem& p,
                      std::span<const double> x, std::span<const std::size_t> a_idx, Workspace& w,
                      std::span<double> out) {
  w.acc_y.fill(0.0);
  for (std::size_t a : a_idx) {
    p.inner_value(a, snap.x_tilde, w.ya.span());
    p.inner_value(a, x, w.yb.span());
    subtract(w.ya, w.yb, w.ya.span());
    axpy(1.0, w.ya, w.acc_y.span());
  }
  scale(1.0 / static_cast<double>(a_idx.size()), w.acc_y.span());
  subtract(snap.G_s, w.acc_y, out);
}

void inner_jacobian_into(const Snapshot& snap, const CompositionProblem& p,
                         std::span<const double> x, std::span<const std::size_t> b_idx,
                         Workspace& w, Matrix& out) {
  w.acc_j.fill(0.0);
  for (std::size_t b : b_idx) {
    p.inner_jacobian(b, snap.x_tilde, w.ja);
    p.inner_jacobian(b, x, w.jb);
    subtract(w.ja.flat(), w.jb.flat(), w.ja.flat());
    axpy(1.0, w.ja.flat(), w.acc_j.flat());
  }
  scale(1.0 / static_cast<double>(b_idx.size()), w.acc_j.flat());
  if (out.rows() != snap.J_s.rows() || out.cols() != snap.J_s.cols()) {
    out.assign_zero(snap.J_s.rows(), snap.J_s.cols());
  }
  subtract(snap.J_s.flat(), w.acc_j.flat(), out.flat());
}

void gradient_vt_into(const Snapshot& snap, const CompositionProblem& p,
                      std::span<const double> g_hat, const Matrix& j_hat,
                      std::span<const std::size_t> i_idx, Workspace& w, std::span<double> out) {
  w.g_hat_mean.fill(0.0);
  w.g_s_mean.fill(0.0);
  for (std::size_t i : i_idx) {
    p.outer_gradient(i, g_hat, w.ya.span());
    axpy(1.0, w.ya, w.g_hat_mean.span());
    p.outer_gradient(i, snap.G_s, w.yb.span());
    axpy(1.0, w.yb, w.g_s_mean.span());
  }
  const double inv = 1.0 / static_cast<double>(i_idx.size());
  scale(inv, w.g_hat_mean.span());
  scale(inv, w.g_s_mean.span());
  matvec_transposed(j_hat, w.g_hat_mean, w.u_hat.span());
  matvec_transposed(snap.J_s, w.g_s_mean, w.u_s.span());
  subtract(w.u_hat, w.u_s, out);
  axpy(1.0, snap.grad_f_s, out);
}

}  // namespace

Snapshot take_snapshot(const CompositionProblem& p, std::span<const double> x_tilde) {
  Snapshot snap;
  snap.x_tilde = Vector(x_tilde.size());
  std::copy(x_tilde.begin(), x_tilde.end(), snap.x_tilde.begin());
  snap.G_s = full_inner_value(p, x_tilde);
  snap.J_s = full_inner_jacobian(p, x_tilde);
  snap.outer_grad_s = full_outer_gradient(p, snap.G_s);
  snap.grad_f_s = Vector(p.dim_x());
  matvec_transposed(snap.J_s, snap.outer_grad_s, snap.grad_f_s.span());
  return snap;
}

Vector estimate_inner_value(const Snapshot& snap, const CompositionProblem& p,
                            std::span<const double> x, std::span<const std::size_t> a_indices) {
  check_snapshot(snap, p);
  check_indices(a_indices, p.n2(), "estimate_inner_value");
  Workspace w(p);
  Vector out(p.dim_y());
  inner_value_into(snap, p, x, a_indices, w, out.span());
  return out;
}

Matrix estimate_inner_jacobian(const Snapshot& snap, const CompositionProblem& p,
                               std::span<const double> x,
                               std::span<const std::size_t> b_indices) {
  check_snapshot(snap, p);
  check_indices(b_indices, p.n2(), "estimate_inner_jacobian");
  Workspace w(p);
  Matrix out(p.dim_y(), p.dim_x());
  inner_jacobian_into(snap, p, x, b_indices, w, out);
  return out;
}

Vector estimate_gradient_vt(const Snapshot& snap, const CompositionProblem& p,
                            std::span<const double> G_hat, const Matrix& J_hat,
                            std::span<const std::size_t> i_indices) {
  check_snapshot(snap, p);
  check_indices(i_indices, p.n1(), "estimate_gradient_vt");
  if (G_hat.size() != p.dim_y() || J_hat.rows() != p.dim_y() || J_hat.cols() != p.dim_x()) {
    throw DomainError("estimate_gradient_vt: estimate shapes do not match the problem");
  }
  Workspace w(p);
  Vector out(p.dim_x());
  gradient_vt_into(snap, p, G_hat, J_hat, i_indices, w, out.span());
  return out;
}

void VrscpgConfig::validate(const CompositionProblem& p) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("vrsc_pg: eta must be positive");
  if (m == 0 || epochs == 0 || A == 0 || B == 0 || b1 == 0) {
    throw DomainError("vrsc_pg: m, epochs, A, B and b1 must be at least 1");
  }
  if (sampling == SamplingMode::full_pass && (A != p.n2() || B != p.n2() || b1 != p.n1())) {
    throw DomainError("vrsc_pg: full_pass sampling requires A = B = n2 and b1 = n1");
  }
  if (x0 && x0->size() != p.dim_x()) throw DomainError("vrsc_pg: x0 has the wrong length");
}

SolveResult vrsc_pg(const CompositionProblem& p, const Regularizer& h, const VrscpgConfig& cfg,
                    const TraceOptions& opts) {
  cfg.validate(p);
  auto counter = std::make_shared<QueryCounter>();
  const CountedProblem cp(p, counter);
  detail::RunMonitor mon(p, h, opts, cfg.eta, counter);
  RngStream rng(cfg.seed);

  Vector x = cfg.x0 ? *cfg.x0 : Vector(p.dim_x());
  if (!x.all_finite()) throw DomainError("vrsc_pg: x0 must be finite");
  Vector x_prev(p.dim_x());
  Vector g_hat(p.dim_y());
  Matrix j_hat(p.dim_y(), p.dim_x());
  Vector v(p.dim_x());
  Workspace w(p);

  std::vector<std::size_t> a_idx(cfg.A), b_idx(cfg.B), i_idx(cfg.b1);
  if (cfg.sampling == SamplingMode::full_pass) {
    std::iota(a_idx.begin(), a_idx.end(), std::size_t{0});
    std::iota(b_idx.begin(), b_idx.end(), std::size_t{0});
    std::iota(i_idx.begin(), i_idx.end(), std::size_t{0});
  }

  const QueryCounts snapshot_cost = snapshot_counts(p.n1(), p.n2());
  const QueryCounts inner_cost = vrsc_pg_inner_counts(cfg.A, cfg.B, cfg.b1);

  mon.record(0, 0, x);
  mon.keep(x);
  std::uint64_t iterations = 0;
  for (std::uint64_t s = 0; s < cfg.epochs; ++s) {
    if (!mon.affordable(snapshot_cost + inner_cost)) {
      return mon.finish(std::move(x), StopReason::query_budget, s, iterations);
    }
    if (mon.out_of_time()) return mon.finish(std::move(x), StopReason::wall_budget, s, iterations);

    const Snapshot snap = take_snapshot(cp, x);
    for (std::uint64_t t = 0; t < cfg.m; ++t) {
      if (t > 0 && (!mon.affordable(inner_cost) || mon.out_of_time())) {
        const StopReason why =
            mon.affordable(inner_cost) ? StopReason::wall_budget : StopReason::query_budget;
        if (!mon.last_row_is(s, t)) mon.record(s, t, x);
        return mon.finish(std::move(x), why, s, iterations);
      }
      if (cfg.sampling == SamplingMode::with_replacement) {
        sample_with_replacement_into(rng, p.n2(), a_idx);
        sample_with_replacement_into(rng, p.n2(), b_idx);
        sample_with_replacement_into(rng, p.n1(), i_idx);
      }
      inner_value_into(snap, cp, x, a_idx, w, g_hat.span());
      inner_jacobian_into(snap, cp, x, b_idx, w, j_hat);
      gradient_vt_into(snap, cp, g_hat, j_hat, i_idx, w, v.span());

      x_prev = x;
      axpy(-cfg.eta, v, x.span());
      h.prox_into(x, cfg.eta, x.span());
      ++iterations;
      if (!x.all_finite()) mon.diverge("vrsc_pg", std::move(x_prev), s, iterations - 1);
      mon.keep(x);
      if (mon.due(t + 1, cfg.m)) mon.record(s, t + 1, x);
    }
  }
  return mon.finish(std::move(x), StopReason::completed, cfg.epochs, iterations);
}

}  // namespace composolve
