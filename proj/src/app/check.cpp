#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "composolve/app.hpp"
#include "composolve/errors.hpp"
#include "composolve/kernels.hpp"

namespace composolve::app {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// Desk-scale instances shared by the checks.
struct Fixtures {
  explicit Fixtures(std::uint64_t seed) {
    RngStream rng(seed);
    RngStream r1 = rng.substream(1), r2 = rng.substream(2), r3 = rng.substream(3),
              r4 = rng.substream(4);
    portfolio = std::make_unique<PortfolioProblem>(gen_gaussian_rewards(60, 10, 2.0, r1));
    MdpData mdp = gen_mdp(10, 3, r2);
    policy = std::make_unique<PolicyEvalProblem>(std::move(mdp.transitions),
                                                 std::move(mdp.rewards), kDefaultDiscount);
    linquad = std::make_unique<LinQuadProblem>(gen_linquad(LinQuadSpec{}, r3));
    lasso = std::make_unique<LassoProblem>(gen_lasso(40, 10, 0.1, r4));
    lasso_comp = std::make_unique<FiniteSumComposition>(*lasso);
  }

  std::vector<const CompositionProblem*> all() const {
    return {portfolio.get(), policy.get(), linquad.get(), lasso_comp.get()};
  }

  std::unique_ptr<PortfolioProblem> portfolio;
  std::unique_ptr<PolicyEvalProblem> policy;
  std::unique_ptr<LinQuadProblem> linquad;
  std::unique_ptr<LassoProblem> lasso;
  std::unique_ptr<FiniteSumComposition> lasso_comp;
};

// Objective of each fixture written out directly, without the composition.
double direct_objective(const Fixtures& fx, const CompositionProblem& p,
                        std::span<const double> x) {
  if (&p == fx.portfolio.get()) {
    const Matrix& r = fx.portfolio->rewards();
    std::vector<double> ret(r.rows());
    double mean = 0.0;
    for (std::size_t t = 0; t < r.rows(); ++t) {
      ret[t] = dot(r.row(t), x);
      mean += ret[t];
    }
    mean /= static_cast<double>(r.rows());
    double var = 0.0;
    for (double v : ret) var += (v - mean) * (v - mean);
    return -mean + var / static_cast<double>(r.rows());
  }
  if (&p == fx.policy.get()) {
    const Matrix& P = fx.policy->transitions();
    const Matrix& R = fx.policy->rewards();
    const double g = fx.policy->gamma();
    double sum = 0.0;
    for (std::size_t s = 0; s < P.rows(); ++s) {
      double tx = 0.0;
      for (std::size_t t = 0; t < P.cols(); ++t) tx += P(s, t) * (R(s, t) + g * x[t]);
      sum += (x[s] - tx) * (x[s] - tx);
    }
    return sum / static_cast<double>(P.rows());
  }
  if (&p == fx.linquad.get()) {
    const auto& maps = fx.linquad->inner_maps();
    const auto& offs = fx.linquad->inner_offsets();
    const std::size_t M = p.dim_y();
    Vector y(M);
    for (std::size_t j = 0; j < maps.size(); ++j) {
      for (std::size_t r = 0; r < M; ++r) y[r] += dot(maps[j].row(r), x) + offs[j][r];
    }
    scale(1.0 / static_cast<double>(maps.size()), y.span());
    double sum = 0.0;
    for (const Vector& b : fx.linquad->outer_targets()) {
      for (std::size_t r = 0; r < M; ++r) sum += 0.5 * (y[r] - b[r]) * (y[r] - b[r]);
    }
    return sum / static_cast<double>(fx.linquad->outer_targets().size());
  }
  const Matrix& a = fx.lasso->design();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double r = dot(a.row(i), x) - fx.lasso->targets()[i];
    sum += 0.5 * r * r;
  }
  return sum / static_cast<double>(a.rows());
}

Vector random_point(RngStream& rng, std::size_t n, double scale_by = 1.0) {
  Vector x = random_normal_vector(rng, n);
  scale(scale_by, x.span());
  return x;
}

class Suite {
 public:
  Suite(const CheckSettings& settings, const CheckHooks& hooks)
      : settings_(settings), hooks_(hooks), fx_(settings.seed) {}

  std::vector<CheckResult> run();

 private:
  using Body = std::function<std::pair<bool, std::string>()>;

  void check(const std::string& name, bool full_only, const Body& body) {
    if (full_only && !settings_.full) return;
    if (!settings_.only.empty()) {
      bool wanted = false;
      for (const std::string& prefix : settings_.only) wanted |= name.rfind(prefix, 0) == 0;
      if (!wanted) return;
    }
    CheckResult r;
    r.name = name;
    const auto start = Clock::now();
    try {
      auto [ok, detail] = body();
      r.passed = ok;
      r.detail = std::move(detail);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    results_.push_back(std::move(r));
  }

  void apply_prox(const Regularizer& h, std::span<const double> x, double eta,
                  std::span<double> out) const {
    if (hooks_.prox) {
      hooks_.prox(h, x, eta, out);
    } else {
      h.prox_into(x, eta, out);
    }
  }

  QueryCounts measured(QueryCounts c) const {
    return hooks_.measured_counts ? hooks_.measured_counts(c) : c;
  }

  RngStream rng(std::uint64_t id) const { return RngStream(settings_.seed).substream(100 + id); }

  const ReferenceOptimum& optimum(const CompositionProblem& p, const Regularizer& h) {
    for (auto& [key, ref] : optima_) {
      if (key.first == &p && key.second == h) return ref;
    }
    optima_.push_back({{&p, h}, compute_reference_optimum(p, h)});
    return optima_.back().second;
  }

  void numerics_checks();
  void regularizer_checks();
  void problem_checks();
  void oracle_checks();
  void solver_checks();
  void metric_checks();
  void cli_checks();

  CheckSettings settings_;
  CheckHooks hooks_;
  Fixtures fx_;
  std::vector<std::pair<std::pair<const CompositionProblem*, Regularizer>, ReferenceOptimum>>
      optima_;
  std::vector<CheckResult> results_;
};

void Suite::numerics_checks() {
  check("numerics.sampling_uniformity", false, [&] {
    RngStream r = rng(1);
    const std::size_t n = 10, draws = 100000;
    std::vector<double> freq(n, 0.0);
    for (std::size_t idx : sample_with_replacement(r, n, draws)) freq[idx] += 1.0;
    const double p = 0.1;
    const double sd = std::sqrt(p * (1 - p) / static_cast<double>(draws));
    double worst = 0.0;
    for (double f : freq) worst = std::max(worst, std::fabs(f / draws - p) / sd);
    return std::pair{worst <= 4.0, "max |freq - 0.1| = " + fmt("%.2f", worst) + " sd"};
  });

  check("numerics.central_difference", false, [&] {
    RngStream r = rng(2);
    double worst = 0.0;
    for (const CompositionProblem* p : fx_.all()) {
      for (int k = 0; k < 20; ++k) {
        const Vector x = random_point(r, p->dim_x(), 0.5);
        const Vector fd = central_difference_gradient(
            [&](std::span<const double> z) { return objective_f(*p, z); }, x);
        worst = std::max(worst, relative_error(full_gradient(*p, x), fd));
      }
    }
    return std::pair{worst <= 1e-5, "max relative error " + fmt("%.3g", worst)};
  });
}

void Suite::regularizer_checks() {
  check("regularizers.prox_nonexpansive", false, [&] {
    RngStream r = rng(3);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 1000; ++k) {
      const Regularizer h = Regularizer::l1(r.next_uniform(0.0, 2.0));
      const double eta = r.next_uniform(0.01, 2.0);
      const Vector a = random_point(r, 8, 2.0), b = random_point(r, 8, 2.0);
      Vector pa(8), pb(8);
      apply_prox(h, a, eta, pa.span());
      apply_prox(h, b, eta, pb.span());
      worst = std::max(worst, l2_norm((pa - pb).span()) - l2_norm((a - b).span()));
    }
    return std::pair{worst <= 1e-12,
                     "max ||prox(a)-prox(b)|| - ||a-b|| = " + fmt("%.3g", worst)};
  });

  check("regularizers.prox_optimality", false, [&] {
    RngStream r = rng(4);
    std::size_t beaten = 0;
    for (int k = 0; k < 200; ++k) {
      const Regularizer h = Regularizer::l1(r.next_uniform(0.1, 2.0));
      const double eta = r.next_uniform(0.05, 2.0);
      const Vector x = random_point(r, 6, 2.0);
      Vector z(6);
      apply_prox(h, x, eta, z.span());
      auto model = [&](const Vector& c) {
        return h.value(c) + l2_norm_sq((c - x).span()) / (2.0 * eta);
      };
      const double best = model(z);
      for (int c = 0; c < 100; ++c) {
        Vector cand = z;
        const double radius = eta * h.lambda() * std::pow(10.0, -r.next_uniform(0.0, 3.0));
        for (double& v : cand) v += radius * r.next_normal();
        if (model(cand) < best - 1e-12) {
          ++beaten;
          break;
        }
      }
    }
    return std::pair{beaten == 0,
                     std::to_string(beaten) + " of 200 prox outputs beaten by a perturbation"};
  });

  check("regularizers.prox_scalar_oracle", false, [&] {
    // Golden-section minimization of the 1-D prox model as the oracle.
    RngStream r = rng(5);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double lambda = r.next_uniform(0.0, 2.0);
      const double eta = r.next_uniform(0.01, 3.0);
      const double x = r.next_uniform(-5.0, 5.0);
      const Regularizer h = Regularizer::l1(lambda);
      auto model = [&](double z) { return lambda * std::fabs(z) + (z - x) * (z - x) / (2 * eta); };
      double lo = -std::fabs(x) - 1.0, hi = std::fabs(x) + 1.0;
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 200; ++it) {
        const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
        if (model(a) <= model(b)) {
          hi = b;
        } else {
          lo = a;
        }
      }
      const double in[1] = {x};
      double out[1];
      apply_prox(h, in, eta, out);
      worst = std::max(worst, std::fabs(out[0] - 0.5 * (lo + hi)));
    }
    return std::pair{worst <= 1e-6, "max |prox - oracle| = " + fmt("%.3g", worst)};
  });

  check("regularizers.subgradient_membership", false, [&] {
    RngStream r = rng(6);
    std::size_t bad = 0;
    for (int k = 0; k < 500; ++k) {
      const double lambda = r.next_uniform(0.0, 2.0);
      const Regularizer h = Regularizer::l1(lambda);
      Vector x = random_point(r, 8);
      for (std::size_t i = 0; i < 8; i += 2) x[i] = 0.0;
      const Vector grad = random_point(r, 8, 2.0);
      const Vector g = h.min_norm_subgradient(x, grad);
      for (std::size_t i = 0; i < 8; ++i) {
        if (std::fabs(g[i]) > lambda + 1e-15) ++bad;
        if (x[i] != 0.0 && g[i] != lambda * (x[i] > 0 ? 1.0 : -1.0)) ++bad;
      }
    }
    return std::pair{bad == 0, std::to_string(bad) + " membership violations"};
  });

  check("regularizers.optimality_at_optimum", false, [&] {
    double worst = 0.0;
    const Regularizer h = Regularizer::l1(1e-2);
    for (const CompositionProblem* p : fx_.all()) {
      const ReferenceOptimum& ref = optimum(*p, h);
      const Vector grad = full_gradient(*p, ref.x);
      const Vector g = h.min_norm_subgradient(ref.x, grad);
      worst = std::max(worst, l2_norm((grad + g).span()));
    }
    return std::pair{worst <= 1e-6, "max ||grad f + g|| at x* = " + fmt("%.3g", worst)};
  });
}

void Suite::problem_checks() {
  check("problems.embedding_fidelity", false, [&] {
    RngStream r = rng(7);
    double worst = 0.0;
    for (const CompositionProblem* p : fx_.all()) {
      for (int k = 0; k < 50; ++k) {
        const Vector x = random_point(r, p->dim_x());
        const double a = objective_f(*p, x), b = direct_objective(fx_, *p, x);
        worst = std::max(worst, std::fabs(a - b) / std::max(1.0, std::fabs(b)));
      }
    }
    return std::pair{worst <= 1e-10, "max relative difference " + fmt("%.3g", worst)};
  });

  check("problems.chain_rule", false, [&] {
    RngStream r = rng(8);
    double worst = 0.0;
    for (const CompositionProblem* p : fx_.all()) {
      for (int k = 0; k < 20; ++k) {
        const Vector x = random_point(r, p->dim_x(), 0.5);
        const Matrix J = full_inner_jacobian(*p, x);
        const Vector g = full_outer_gradient(*p, full_inner_value(*p, x));
        Vector chain(p->dim_x());
        matvec_transposed(J, g, chain.span());
        worst = std::max(worst, relative_error(full_gradient(*p, x), chain));
      }
    }
    return std::pair{worst <= 1e-12, "max relative difference " + fmt("%.3g", worst)};
  });

  check("problems.portfolio_affine_jacobian", false, [&] {
    RngStream r = rng(9);
    const PortfolioProblem& p = *fx_.portfolio;
    const Vector zero(p.dim_x());
    bool same = true;
    for (std::size_t j = 0; j < p.n2(); ++j) {
      same &= p.inner_jacobian(j, random_point(r, p.dim_x())) == p.inner_jacobian(j, zero);
    }
    return std::pair{same, same ? "grad G_j(x) == grad G_j(0) for all j" : "Jacobian varies"};
  });

  check("problems.policy_zero_residual", false, [&] {
    const double f = objective_f(*fx_.policy, fx_.policy->exact_value_function());
    return std::pair{f <= 1e-9, "f((I - gamma P)^-1 rbar) = " + fmt("%.3g", f)};
  });

  check("problems.mdp_ergodic", false, [&] {
    double smallest = std::numeric_limits<double>::infinity();
    for (double v : fx_.policy->transitions().flat()) smallest = std::min(smallest, v);
    return std::pair{smallest > 0.0, "min P(s,s') = " + fmt("%.3g", smallest)};
  });
}

void Suite::oracle_checks() {
  check("oracle.query_exactness", false, [&] {
    RngStream r = rng(10);
    std::size_t mismatches = 0, runs = 0;
    TraceOptions quiet;
    quiet.record = false;
    for (int k = 0; k < 20; ++k) {
      const CompositionProblem* p = fx_.all()[k % 3];
      const Regularizer h = Regularizer::l1(1e-3);

      VrscpgConfig v;
      v.eta = 1e-3;
      v.m = 1 + r.next_index(8);
      v.epochs = 1 + r.next_index(4);
      v.A = 1 + r.next_index(6);
      v.B = 1 + r.next_index(6);
      v.b1 = 1 + r.next_index(6);
      v.seed = r.next_u64();
      {
        CountedProblem cp = counted(*p);
        const SolveResult res = vrsc_pg(cp, h, v, quiet);
        const QueryCounts want = vrsc_pg_counts(p->n1(), p->n2(), v.m, v.A, v.B, v.b1, v.epochs);
        mismatches += measured(cp.counts()) == want ? 0 : 1;
        mismatches += measured(res.counts) == want ? 0 : 1;
        mismatches += want.total() == vrsc_pg_cost(p->n1(), p->n2(), v.m, v.A, v.B, v.b1,
                                                   v.epochs)
                          ? 0
                          : 1;
      }

      ScpgConfig s;
      s.alpha0 = 1e-3;
      s.iters = 1 + r.next_index(50);
      s.seed = r.next_u64();
      {
        CountedProblem cp = counted(*p);
        const SolveResult res = scpg_baseline(cp, h, s, quiet);
        mismatches += measured(cp.counts()) == scpg_counts(s.iters) ? 0 : 1;
        mismatches += measured(res.counts) == scpg_counts(s.iters) ? 0 : 1;
      }

      ProxFullGradientConfig g;
      g.eta = 1e-3;
      g.iters = 1 + r.next_index(10);
      {
        CountedProblem cp = counted(*p);
        const SolveResult res = prox_full_gradient(cp, h, g, quiet);
        const QueryCounts want = prox_full_gradient_counts(p->n1(), p->n2(), g.iters);
        mismatches += measured(cp.counts()) == want ? 0 : 1;
        mismatches += measured(res.counts) == want ? 0 : 1;
      }

      ProxSvrgConfig q;
      q.eta = 1e-3;
      q.m = 1 + r.next_index(20);
      q.epochs = 1 + r.next_index(4);
      q.seed = r.next_u64();
      {
        CountedFiniteSum cf(*fx_.lasso, std::make_shared<QueryCounter>());
        const SolveResult res = prox_svrg(cf, h, q, quiet);
        const QueryCounts want = prox_svrg_counts(fx_.lasso->n(), q.m, q.epochs);
        mismatches += measured(cf.counts()) == want ? 0 : 1;
        mismatches += measured(res.counts) == want ? 0 : 1;
      }
      runs += 4;
    }
    return std::pair{mismatches == 0, std::to_string(runs) + " runs, " +
                                          std::to_string(mismatches) + " count mismatches"};
  });

  check("oracle.wrapping_bitwise", false, [&] {
    RngStream r = rng(11);
    bool same = true;
    for (const CompositionProblem* p : fx_.all()) {
      CountedProblem cp = counted(*p);
      for (int k = 0; k < 10; ++k) {
        const Vector x = random_point(r, p->dim_x());
        const Vector y = random_point(r, p->dim_y());
        const std::size_t j = r.next_index(p->n2()), i = r.next_index(p->n1());
        same &= cp.inner_value(j, x) == p->inner_value(j, x);
        same &= cp.inner_jacobian(j, x) == p->inner_jacobian(j, x);
        same &= cp.outer_gradient(i, y) == p->outer_gradient(i, y);
        same &= cp.outer_value(i, y) == p->outer_value(i, y);
      }
    }
    return std::pair{same, same ? "counted and raw evaluators agree bitwise" : "outputs differ"};
  });
}

void Suite::solver_checks() {
  check("solvers.snapshot_cancellation", false, [&] {
    RngStream r = rng(12);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const CompositionProblem& p = *fx_.all()[k % 4];
      const Vector xt = random_point(r, p.dim_x());
      const Snapshot snap = take_snapshot(p, xt);
      const auto a = sample_with_replacement(r, p.n2(), 1 + r.next_index(8));
      const auto b = sample_with_replacement(r, p.n2(), 1 + r.next_index(8));
      const auto i = sample_with_replacement(r, p.n1(), 1 + r.next_index(8));
      const Vector G = estimate_inner_value(snap, p, xt, a);
      const Matrix J = estimate_inner_jacobian(snap, p, xt, b);
      const Vector v = estimate_gradient_vt(snap, p, G, J, i);
      worst = std::max({worst, max_abs_diff(G, snap.G_s), max_abs_diff(J.flat(), snap.J_s.flat()),
                        max_abs_diff(v, full_gradient(p, xt))});
    }
    return std::pair{worst <= 1e-12, "max deviation at x = x_tilde " + fmt("%.3g", worst)};
  });

  check("solvers.unbiasedness", false, [&] {
    // Projections on random directions; 4 standard errors plus a rounding allowance.
    RngStream r = rng(13);
    const std::size_t samples = settings_.full ? 100000 : 20000;
    double worst = 0.0;
    for (const CompositionProblem* p :
         {static_cast<const CompositionProblem*>(fx_.portfolio.get()),
          static_cast<const CompositionProblem*>(fx_.policy.get())}) {
      for (int k = 0; k < 5; ++k) {
        const Snapshot snap = take_snapshot(*p, random_point(r, p->dim_x()));
        const Vector x = random_point(r, p->dim_x());
        const Vector u = random_point(r, p->dim_y());
        const Vector w = random_point(r, p->dim_y() * p->dim_x());
        const double g_true = dot(u, full_inner_value(*p, x));
        const double j_true = dot(w, full_inner_jacobian(*p, x).flat());
        double sg = 0, sg2 = 0, sj = 0, sj2 = 0;
        std::vector<std::size_t> idx(5);
        for (std::size_t s = 0; s < samples; ++s) {
          sample_with_replacement_into(r, p->n2(), idx);
          const double g = dot(u, estimate_inner_value(snap, *p, x, idx));
          sample_with_replacement_into(r, p->n2(), idx);
          const double j = dot(w, estimate_inner_jacobian(snap, *p, x, idx).flat());
          sg += g;
          sg2 += g * g;
          sj += j;
          sj2 += j * j;
        }
        const double ns = static_cast<double>(samples);
        auto z = [&](double sum, double sum2, double truth) {
          const double mean = sum / ns;
          const double var = std::max(0.0, sum2 / ns - mean * mean) * ns / (ns - 1);
          const double band = 4.0 * std::sqrt(var / ns) + 1e-10 * (1.0 + std::fabs(truth));
          return std::fabs(mean - truth) / band;
        };
        worst = std::max({worst, z(sg, sg2, g_true), z(sj, sj2, j_true)});
      }
    }
    return std::pair{worst <= 1.0,
                     "max |mean - truth| / band = " + fmt("%.3f", worst) + " (" +
                         std::to_string(samples) + " resamples)"};
  });

  check("solvers.variance_shrinkage", false, [&] {
    RngStream r = rng(14);
    const LinQuadProblem& p = *fx_.linquad;
    const Vector xt = random_point(r, p.dim_x());
    const Snapshot snap = take_snapshot(p, xt);
    const Vector dir = random_point(r, p.dim_x());
    std::vector<double> med;
    std::vector<std::size_t> a(5), b(5), i(5);
    for (double d : {0.01, 0.1, 1.0}) {
      Vector x = xt;
      axpy(d / l2_norm(dir), dir, x.span());
      const Vector truth = full_gradient(p, x);
      std::vector<double> dev;
      for (int s = 0; s < 100; ++s) {
        sample_with_replacement_into(r, p.n2(), a);
        sample_with_replacement_into(r, p.n2(), b);
        sample_with_replacement_into(r, p.n1(), i);
        const Vector G = estimate_inner_value(snap, p, x, a);
        const Matrix J = estimate_inner_jacobian(snap, p, x, b);
        dev.push_back(l2_norm_sq((estimate_gradient_vt(snap, p, G, J, i) - truth).span()));
      }
      med.push_back(median(dev));
    }
    const bool ok = med[0] < med[1] && med[1] < med[2];
    return std::pair{ok, "median ||v - grad f||^2 at distances .01/.1/1: " +
                             fmt("%.3g", med[0]) + " / " + fmt("%.3g", med[1]) + " / " +
                             fmt("%.3g", med[2])};
  });

  check("solvers.determinism", false, [&] {
    VrscpgConfig c;
    c.eta = 1e-2;
    c.m = 20;
    c.epochs = 3;
    c.seed = 99;
    TraceOptions o;
    o.keep_iterates = true;
    const Regularizer h = Regularizer::l1(1e-3);
    const SolveResult a = vrsc_pg(*fx_.portfolio, h, c, o);
    const SolveResult b = vrsc_pg(*fx_.portfolio, h, c, o);
    const bool same = a.iterates == b.iterates;
    return std::pair{same, std::to_string(a.iterates.size()) + " iterates, " +
                               (same ? "bitwise identical" : "differ")};
  });

  check("solvers.full_batch_degeneration", false, [&] {
    const LinQuadProblem& p = *fx_.linquad;
    const Regularizer h = Regularizer::l1(1e-2);
    const double eta = 0.5 / estimate_smoothness(p, Vector(p.dim_x()));
    TraceOptions o;
    o.keep_iterates = true;
    o.record = false;
    VrscpgConfig v;
    v.eta = eta;
    v.m = 1;
    v.epochs = 50;
    v.A = v.B = p.n2();
    v.b1 = p.n1();
    v.sampling = SamplingMode::full_pass;
    ProxFullGradientConfig g;
    g.eta = eta;
    g.iters = 50;
    const SolveResult a = vrsc_pg(p, h, v, o);
    const SolveResult b = prox_full_gradient(p, h, g, o);
    if (a.iterates.size() != b.iterates.size()) {
      return std::pair{false, "iterate counts differ: " + std::to_string(a.iterates.size()) +
                                  " vs " + std::to_string(b.iterates.size())};
    }
    double worst = 0.0;
    for (std::size_t t = 0; t < a.iterates.size(); ++t) {
      worst = std::max(worst, max_abs_diff(a.iterates[t], b.iterates[t]));
    }
    return std::pair{worst <= 1e-12,
                     std::to_string(a.iterates.size()) + " steps, max deviation " +
                         fmt("%.3g", worst)};
  });

  check("solvers.geometric_decrease", false, [&] {
    const LinQuadProblem& p = *fx_.linquad;
    const Regularizer h = Regularizer::l1(1e-2);
    TraceOptions o;
    o.stride = 0;
    o.x_star = optimum(p, h);
    const double L = estimate_smoothness(p, Vector(p.dim_x()));
    std::vector<double> slopes, r2s;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      VrscpgConfig c;
      c.eta = 0.5 / L;
      c.m = 50;
      c.epochs = 15;
      c.seed = seed;
      const SolveResult res = vrsc_pg(p, h, c, o);
      std::vector<double> xs, ys;
      for (const TraceRecord& t : res.trace) {
        if (t.inner_iter == c.m && t.gap > 1e-13) {
          xs.push_back(static_cast<double>(t.epoch));
          ys.push_back(std::log(t.gap));
        }
      }
      const double n = static_cast<double>(xs.size());
      double mx = 0, my = 0;
      for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k] / n, my += ys[k] / n;
      double sxx = 0, sxy = 0, syy = 0;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
      }
      slopes.push_back(xs.size() >= 3 ? sxy / sxx : 0.0);
      r2s.push_back(xs.size() >= 3 && syy > 0 ? sxy * sxy / (sxx * syy) : 0.0);
    }
    const double slope = median(slopes), r2 = median(r2s);
    return std::pair{slope < 0 && r2 >= 0.9,
                     "median slope " + fmt("%.3g", slope) + ", median R^2 " + fmt("%.4f", r2)};
  });

  check("solvers.gradient_mapping_decrease", false, [&] {
    const LinQuadProblem& p = *fx_.linquad;
    const Regularizer h = Regularizer::l1(1e-2);
    const GeneralParams gp = suggest_params_general(p.n1(), p.n2(), p.constants(10.0));
    const QueryCounts per_epoch =
        snapshot_counts(p.n1(), p.n2()) + gp.m * vrsc_pg_inner_counts(gp.A_min, gp.B_min, gp.b1);
    const std::uint64_t T = 20 * per_epoch.total();
    std::vector<double> at_t, at_2t;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (int twice = 0; twice < 2; ++twice) {
        VrscpgConfig c;
        c.eta = gp.eta;
        c.m = gp.m;
        c.A = gp.A_min;
        c.B = gp.B_min;
        c.b1 = gp.b1;
        c.epochs = std::numeric_limits<std::size_t>::max() / 4;
        c.seed = seed;
        TraceOptions o;
        o.max_queries = (twice + 1) * T;
        const SolveResult res = vrsc_pg(p, h, c, o);
        (twice ? at_2t : at_t).push_back(trace_min_grad_map_sq(res.trace));
      }
    }
    const double a = median(at_t), b = median(at_2t);
    return std::pair{b <= 0.75 * a, "median min ||G||^2: budget T " + fmt("%.3g", a) +
                                        ", budget 2T " + fmt("%.3g", b)};
  });

  check("solvers.closed_form_recovery", false, [&] {
    std::string detail;
    bool ok = true;
    {
      // Prox-SVRG against plain ISTA on the same lasso instance.
      const LassoProblem& p = *fx_.lasso;
      const Regularizer h = Regularizer::l1(0.05);
      const double L = p.smoothness();
      Vector x(p.dim());
      for (int it = 0; it < 200000; ++it) {
        const Vector g = finite_sum_gradient(p, x);
        Vector next = x;
        axpy(-1.0 / L, g, next.span());
        next = h.prox(next, 1.0 / L);
        const double step = max_abs_diff(next, x);
        x = std::move(next);
        if (step <= 1e-15) break;
      }
      ProxSvrgConfig c;
      c.eta = 0.1 / p.max_component_smoothness();
      c.m = 2 * p.n();
      c.epochs = 300;
      c.seed = 3;
      TraceOptions o;
      o.record = false;
      const double err = max_abs_diff(prox_svrg(p, h, c, o).x_final, x);
      ok &= err <= 1e-8;
      detail += "lasso " + fmt("%.2g", err);
    }
    {
      const LinQuadProblem& p = *fx_.linquad;
      ProxFullGradientConfig c;
      c.eta = 1.0 / estimate_smoothness(p, Vector(p.dim_x()));
      c.iters = 100000;
      c.tol = 1e-14;
      TraceOptions o;
      o.record = false;
      const double err =
          max_abs_diff(prox_full_gradient(p, Regularizer::zero(), c, o).x_final,
                       p.closed_form_optimum());
      ok &= err <= 1e-8;
      detail += ", linquad " + fmt("%.2g", err);
    }
    {
      RngStream r = RngStream(settings_.seed).substream(15);
      MdpData mdp = gen_mdp(50, 10, r);
      const PolicyEvalProblem p(std::move(mdp.transitions), std::move(mdp.rewards),
                                kDefaultDiscount);
      VrscpgConfig c;
      c.eta = 2.0;
      c.m = 100;
      c.epochs = std::numeric_limits<std::size_t>::max() / 4;
      c.seed = 1;
      TraceOptions o;
      o.record = false;
      o.max_queries = 5000000;
      const double err =
          max_abs_diff(vrsc_pg(p, Regularizer::zero(), c, o).x_final, p.exact_value_function());
      ok &= err <= 1e-6;
      detail += ", policy S=50 " + fmt("%.2g", err);
    }
    return std::pair{ok, "sup-norm errors: " + detail};
  });

  check("params.corollary1_rate", false, [&] {
    const ProblemConstants unit{};
    const StronglyConvexParams sp = suggest_params_strongly_convex(unit);
    const double rho = theorem1_rho(sp.eta, sp.m, sp.A, sp.B, unit);
    return std::pair{rho <= 2.0 / 3.0 + 1e-9, "rho = " + fmt("%.12f", rho)};
  });
}

void Suite::metric_checks() {
  const Regularizer h = Regularizer::l1(1e-2);

  check("metrics.gap_nonnegative", false, [&] {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t rows = 0;
    for (const CompositionProblem* p : {static_cast<const CompositionProblem*>(fx_.portfolio.get()),
                                        static_cast<const CompositionProblem*>(fx_.linquad.get())}) {
      TraceOptions o;
      o.x_star = optimum(*p, h);
      o.stride = 5;
      const double L = estimate_smoothness(*p, Vector(p->dim_x()));
      VrscpgConfig v;
      v.eta = 0.1 / L;
      v.m = 50;
      v.epochs = 20;
      ScpgConfig s;
      s.alpha0 = 0.1 / L;
      s.iters = 2000;
      ProxFullGradientConfig g;
      g.eta = 1.0 / L;
      g.iters = 500;
      for (const SolveResult& res :
           {vrsc_pg(*p, h, v, o), scpg_baseline(*p, h, s, o), prox_full_gradient(*p, h, g, o)}) {
        for (const TraceRecord& t : res.trace) worst = std::min(worst, t.gap);
        rows += res.trace.size();
      }
    }
    return std::pair{worst >= -1e-9,
                     "min gap " + fmt("%.3g", worst) + " over " + std::to_string(rows) + " rows"};
  });

  check("metrics.stationarity_measures", false, [&] {
    RngStream r = rng(16);
    double at_opt = 0.0, away = std::numeric_limits<double>::infinity();
    for (const CompositionProblem* p : fx_.all()) {
      const ReferenceOptimum& ref = optimum(*p, h);
      at_opt = std::max({at_opt, composite_grad_sq(*p, h, ref.x),
                         grad_map_sq(*p, h, ref.x, ref.eta)});
      for (int k = 0; k < 10; ++k) {
        const Vector x = random_point(r, p->dim_x());
        away = std::min({away, composite_grad_sq(*p, h, x), grad_map_sq(*p, h, x, ref.eta)});
      }
    }
    return std::pair{at_opt <= 1e-12 && away > 1e-6, "max at x* " + fmt("%.3g", at_opt) +
                                                         ", min at random x " + fmt("%.3g", away)};
  });

  check("metrics.trace_monotone", false, [&] {
    VrscpgConfig v;
    v.eta = 1e-2;
    v.m = 30;
    v.epochs = 5;
    TraceOptions o;
    o.stride = 3;
    const SolveResult res = vrsc_pg(*fx_.portfolio, h, v, o);
    std::size_t bad = 0;
    for (std::size_t k = 1; k < res.trace.size(); ++k) {
      bad += res.trace[k].queries() < res.trace[k - 1].queries();
      bad += res.trace[k].wall_ms < res.trace[k - 1].wall_ms;
    }
    return std::pair{bad == 0, std::to_string(res.trace.size()) + " rows, " +
                                   std::to_string(bad) + " decreases"};
  });
}

// Drops the wall_ms column (third field) from every CSV row.
std::string mask_wall(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    const std::size_t b = line.find(',', line.find(',') + 1);
    const std::size_t c = line.find(',', b + 1);
    out += line.substr(0, b) + line.substr(c) + "\n";
  }
  return out;
}

void Suite::cli_checks() {
  const std::filesystem::path root =
      std::filesystem::temp_directory_path() /
      ("composolve_check_" + std::to_string(settings_.seed) + "_" +
       std::to_string(Clock::now().time_since_epoch().count()));

  auto small_config = [](std::uint64_t budget) {
    json doc = {{"name", "check"},
                {"problem", {{"kind", "portfolio"},
                             {"params", {{"n", 40}, {"N", 8}, {"kappa_cov", 2}}},
                             {"data_seed", 3}}},
                {"regularizer", {{"kind", "l1"}, {"lambda", 1e-3}}},
                {"solvers",
                 {{{"name", "vrsc_pg"}, {"eta", 0.01}, {"m", 20}},
                  {{"name", "scpg"}, {"alpha0", 0.1}, {"exp_beta", 0.0}}}},
                {"seeds", {1, 2}},
                {"budget", {{"max_queries", budget}}},
                {"trace", {{"stride", 5}}}};
    return parse_config(doc.dump());
  };

  check("cli.csv_schema", false, [&] {
    std::vector<TraceRecord> rows(2);
    rows[1].epoch = 1;
    rows[1].gap = 0.25;
    const std::string csv = trace_to_csv(rows);
    const bool round = parse_trace_csv(csv, "roundtrip").size() == 2;
    bool drift_rejected = false;
    std::string drifted = csv;
    drifted.replace(0, 5, "epoc_");
    try {
      parse_trace_csv(drifted, "drift");
    } catch (const DomainError&) {
      drift_rejected = true;
    }
    return std::pair{round && drift_rejected, std::string("round trip ") +
                                                  (round ? "ok" : "failed") + ", header drift " +
                                                  (drift_rejected ? "rejected" : "accepted")};
  });

  check("cli.replay", false, [&] {
    const ExperimentConfig cfg = small_config(20000);
    const RunSummary a = cmd_run(cfg, root / "a");
    const RunSummary b = cmd_run(cfg, root / "b");
    std::size_t differ = 0;
    for (std::size_t k = 0; k < a.runs.size(); ++k) {
      differ += mask_wall(read_text_file(a.runs[k].csv)) != mask_wall(read_text_file(b.runs[k].csv));
    }
    return std::pair{differ == 0 && !a.runs.empty(),
                     std::to_string(a.runs.size()) + " CSV pairs, " + std::to_string(differ) +
                         " differ outside wall_ms"};
  });

  check("cli.budget_respected", false, [&] {
    const std::uint64_t budget = 7777;
    const ExperimentConfig cfg = small_config(budget);
    const RunSummary s = cmd_run(cfg, root / "budget");
    std::uint64_t worst = 0;
    bool ok = true;
    for (const RunRecord& r : s.runs) {
      const SolverSpec& spec = r.solver == "vrsc_pg" ? cfg.solvers[0] : cfg.solvers[1];
      const std::uint64_t slack = r.solver == "vrsc_pg"
                                      ? vrsc_pg_inner_counts(spec.A, spec.B, spec.b1).total()
                                      : scpg_counts(1).total();
      for (const TraceRecord& t : r.trace) {
        worst = std::max(worst, t.queries());
        ok &= t.queries() <= budget + slack;
      }
    }
    return std::pair{ok, "max queries " + std::to_string(worst) + " against budget " +
                             std::to_string(budget)};
  });

  check("cli.plot_deterministic", false, [&] {
    const ExperimentConfig cfg = small_config(5000);
    const RunSummary s = cmd_run(cfg, root / "plot");
    std::vector<std::filesystem::path> csvs;
    for (const RunRecord& r : s.runs) csvs.push_back(r.csv);
    const PlotOutput a = cmd_plot(csvs, XAxis::queries, YAxis::gap, root / "plot" / "a.svg");
    const PlotOutput b = cmd_plot(csvs, XAxis::queries, YAxis::gap, root / "plot" / "b.svg");
    std::size_t lines = 0;
    for (std::size_t pos = 0; (pos = a.svg.find("<polyline", pos)) != std::string::npos; ++pos) {
      ++lines;
    }
    const bool ok = a.svg == b.svg && lines == csvs.size();
    return std::pair{ok, std::to_string(lines) + " polylines, rerender " +
                             (a.svg == b.svg ? "identical" : "differs")};
  });

  check("cli.figure1_ordering", true, [&] {
    std::string detail;
    bool ok = true;
    std::vector<double> vr_med, sc_med;
    for (double kappa : {2.0, 10.0}) {
      json doc = {{"name", "fig1"},
                  {"problem", {{"kind", "portfolio"},
                               {"params", {{"n", 200}, {"N", 50}, {"kappa_cov", kappa}}},
                               {"data_seed", 1}}},
                  {"regularizer", {{"kind", "l1"}, {"lambda", 1e-3}}},
                  {"solvers",
                   {{{"name", "vrsc_pg"}, {"eta_grid", {1, 0.1, 0.01, 1e-3, 1e-4}}, {"m", 100}},
                    {{"name", "scpg"}, {"eta_grid", {1, 0.1, 0.01, 1e-3, 1e-4}}}}},
                  {"seeds", {1, 2, 3, 4, 5}},
                  {"budget", {{"max_queries", 1000000}}},
                  {"trace", {{"stride", 20}}}};
      const RunSummary s = cmd_run(parse_config(doc.dump()), root / "fig1");
      auto first_hit = [](const RunRecord& r, double tau) {
        for (const TraceRecord& t : r.trace) {
          if (t.gap <= tau) return static_cast<double>(t.queries());
        }
        return std::numeric_limits<double>::infinity();
      };
      int wins = 0;
      std::vector<double> vr, sc;
      for (std::size_t k = 0; k < 5; ++k) {
        const double a = first_hit(s.runs[k], 1e-6), b = first_hit(s.runs[5 + k], 1e-6);
        wins += a < b;
        vr.push_back(a);
        sc.push_back(first_hit(s.runs[5 + k], 1e-1));
      }
      ok &= wins >= 4;
      vr_med.push_back(median(vr));
      sc_med.push_back(median(sc));
      detail += "kappa " + fmt("%g", kappa) + ": " + std::to_string(wins) + "/5 wins; ";
    }
    ok &= vr_med[1] > vr_med[0] && sc_med[1] > sc_med[0];
    detail += "median queries k2 -> k10: vrsc_pg(1e-6) " + fmt("%g", vr_med[0]) + " -> " +
              fmt("%g", vr_med[1]) + ", scpg(1e-1) " + fmt("%g", sc_med[0]) + " -> " +
              fmt("%g", sc_med[1]);
    return std::pair{ok, detail};
  });

  std::error_code ec;
  std::filesystem::remove_all(root, ec);
}

std::vector<CheckResult> Suite::run() {
  numerics_checks();
  regularizer_checks();
  problem_checks();
  oracle_checks();
  solver_checks();
  metric_checks();
  cli_checks();
  return results_;
}

}  // namespace

CheckSettings parse_check_settings(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("check settings: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DomainError("check settings: top level must be an object");
  CheckSettings s;
  try {
    s.full = doc.value("full", s.full);
    s.seed = doc.value("seed", s.seed);
    s.only = doc.value("only", s.only);
  } catch (const json::exception& e) {
    throw DomainError(std::string("check settings: ") + e.what());
  }
  return s;
}

std::vector<CheckResult> cmd_check(const CheckSettings& settings, const CheckHooks& hooks) {
  return Suite(settings, hooks).run();
}

std::string format_report(const std::vector<CheckResult>& results) {
  std::string out;
  for (const CheckResult& r : results) {
    out += (r.passed ? "[PASS] " : "[FAIL] ") + r.name + ": " + r.detail + " (" +
           fmt("%.2f", r.seconds) + " s)\n";
  }
  return out;
}

}  // namespace composolve::app
