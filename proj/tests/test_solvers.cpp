#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "composolve/errors.hpp"
#include "composolve/solvers.hpp"
#include "support.hpp"

using namespace composolve;
using namespace testing_support;

namespace {

// Linear inner maps with an exponential outer layer,
//   G_j(x) = Q_j x + c_j,   F_i(y) = sum_k w_ik exp(y_k),
// so the outer gradient is curved and the composed estimator is biased.
class ExpOuterProblem final : public CompositionProblem {
 public:
  ExpOuterProblem(std::size_t n1, std::size_t n2, std::size_t M, std::size_t N, RngStream& rng)
      : M_(M), N_(N) {
    for (std::size_t j = 0; j < n2; ++j) {
      Matrix q(M, N);
      for (double& v : q.flat()) v = rng.next_normal();
      maps_.push_back(std::move(q));
      offsets_.push_back(random_vec(rng, M, 0.5));
    }
    for (std::size_t i = 0; i < n1; ++i) {
      Vector w(M);
      for (double& v : w) v = rng.next_uniform(0.5, 1.5);
      weights_.push_back(std::move(w));
    }
  }

  std::string_view kind() const noexcept override { return "exp_outer"; }
  std::size_t n1() const noexcept override { return weights_.size(); }
  std::size_t n2() const noexcept override { return maps_.size(); }
  std::size_t dim_x() const noexcept override { return N_; }
  std::size_t dim_y() const noexcept override { return M_; }

 private:
  void do_inner_value(std::size_t j, std::span<const double> x, std::span<double> out) const override {
    for (std::size_t r = 0; r < M_; ++r) {
      double s = offsets_[j][r];
      for (std::size_t c = 0; c < N_; ++c) s += maps_[j](r, c) * x[c];
      out[r] = s;
    }
  }
  void do_inner_jacobian(std::size_t j, std::span<const double>, Matrix& out) const override {
    out = maps_[j];
  }
  double do_outer_value(std::size_t i, std::span<const double> y) const override {
    double s = 0;
    for (std::size_t k = 0; k < M_; ++k) s += weights_[i][k] * std::exp(y[k]);
    return s;
  }
  void do_outer_gradient(std::size_t i, std::span<const double> y, std::span<double> out) const override {
    for (std::size_t k = 0; k < M_; ++k) out[k] = weights_[i][k] * std::exp(y[k]);
  }

  std::size_t M_, N_;
  std::vector<Matrix> maps_;
  std::vector<Vector> offsets_;
  std::vector<Vector> weights_;
};

std::vector<std::size_t> draw(RngStream& rng, std::size_t n, std::size_t k) {
  return sample_with_replacement(rng, n, k);
}

// Running mean and standard error per coordinate.
// Long-double sums keep accumulation error well below the tolerances.
struct Moments {
  std::vector<long double> sum, sum_sq;
  std::size_t count = 0;
  explicit Moments(std::size_t n) : sum(n, 0.0), sum_sq(n, 0.0) {}
  void add(std::span<const double> v) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      sum[k] += v[k];
      sum_sq[k] += static_cast<long double>(v[k]) * v[k];
    }
    ++count;
  }
  double mean(std::size_t k) const { return static_cast<double>(sum[k] / count); }
  double se(std::size_t k) const {
    const long double n = count;
    const long double var = std::max(0.0L, (sum_sq[k] - sum[k] * sum[k] / n) / (n - 1));
    return static_cast<double>(std::sqrt(var / n));
  }
};

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::fabs(a[k] - b[k]));
  return d;
}

// Plain ISTA on (1/n) sum_i 0.5 (<a_i, x> - y_i)^2 + lambda ||x||_1, written from scratch.
std::vector<double> ista(const LassoProblem& p, double lambda, double eta, std::size_t steps) {
  const std::size_t n = p.n(), N = p.dim();
  std::vector<double> x(N, 0.0), g(N);
  for (std::size_t t = 0; t < steps; ++t) {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double r = -p.targets()[i];
      for (std::size_t c = 0; c < N; ++c) r += p.design()(i, c) * x[c];
      for (std::size_t c = 0; c < N; ++c) g[c] += r * p.design()(i, c) / static_cast<double>(n);
    }
    for (std::size_t c = 0; c < N; ++c) x[c] = soft(x[c] - eta * g[c], eta * lambda);
  }
  return x;
}

TraceOptions keep_all() {
  TraceOptions o;
  o.keep_iterates = true;
  o.record = false;
  return o;
}

}  // namespace

TEST_CASE("snapshot holds the full-batch quantities") {
  Instances inst;
  RngStream rng(1);
  for (const CompositionProblem* p : inst.all()) {
    const Vector x = random_vec(rng, p->dim_x());
    const Snapshot s = take_snapshot(*p, x);
    CHECK(s.x_tilde == x);
    CHECK(s.G_s == full_inner_value(*p, x));
    CHECK(s.J_s == full_inner_jacobian(*p, x));
    CHECK(rel_err(s.grad_f_s, full_gradient(*p, x)) <= 1e-14);
  }
}

TEST_CASE("estimators cancel exactly at the snapshot point") {
  Instances inst;
  RngStream rng(2);
  for (int k = 0; k < 100; ++k) {
    const CompositionProblem& p = *inst.all()[k % 4];
    const Vector x = random_vec(rng, p.dim_x());
    const Snapshot s = take_snapshot(p, x);
    const auto a = draw(rng, p.n2(), 1 + rng.next_index(6));
    const auto b = draw(rng, p.n2(), 1 + rng.next_index(6));
    const auto i = draw(rng, p.n1(), 1 + rng.next_index(6));
    const Vector G = estimate_inner_value(s, p, x, a);
    const Matrix J = estimate_inner_jacobian(s, p, x, b);
    const Vector v = estimate_gradient_vt(s, p, G, J, i);
    CHECK(G == s.G_s);
    CHECK(J == s.J_s);
    CHECK(sup_diff(v, s.grad_f_s) <= 1e-12);
  }
}

TEST_CASE("single-index estimators follow the formula") {
  Instances inst;
  const PolicyEvalProblem& p = inst.policy.front();
  RngStream rng(3);
  const Vector xt = random_vec(rng, p.dim_x()), x = random_vec(rng, p.dim_x());
  const Snapshot s = take_snapshot(p, xt);
  const std::size_t j = 4;
  const Vector G = estimate_inner_value(s, p, x, std::vector<std::size_t>{j});
  const Vector gt = p.inner_value(j, xt), gx = p.inner_value(j, x);
  for (std::size_t r = 0; r < p.dim_y(); ++r) {
    CHECK(G[r] == doctest::Approx(s.G_s[r] - gt[r] + gx[r]).epsilon(1e-14).scale(1.0));
  }

  // Affine inner maps: the Jacobian estimate is exact anywhere.
  for (const CompositionProblem* q : {static_cast<const CompositionProblem*>(&inst.portfolio.front()),
                                      static_cast<const CompositionProblem*>(&inst.linquad.front())}) {
    const Snapshot sq = take_snapshot(*q, random_vec(rng, q->dim_x()));
    const Matrix J = estimate_inner_jacobian(sq, *q, random_vec(rng, q->dim_x(), 5), draw(rng, q->n2(), 3));
    CHECK(sup_diff(J.flat(), sq.J_s.flat()) <= 1e-13);
  }

  CHECK_THROWS_AS(estimate_inner_value(s, p, x, std::vector<std::size_t>{}), DomainError);
  CHECK_THROWS_AS(estimate_inner_jacobian(s, p, x, std::vector<std::size_t>{}), DomainError);
  CHECK_THROWS_AS(estimate_gradient_vt(s, p, G, s.J_s, std::vector<std::size_t>{}), DomainError);
  CHECK_THROWS_AS(estimate_inner_value(s, p, x, std::vector<std::size_t>{p.n2()}), DomainError);
}

TEST_CASE("exact inputs and a full outer pass give the full gradient") {
  Instances inst;
  RngStream rng(4);
  for (const CompositionProblem* p : inst.all()) {
    const Snapshot s = take_snapshot(*p, random_vec(rng, p->dim_x()));
    const Vector x = random_vec(rng, p->dim_x());
    std::vector<std::size_t> all(p->n1());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const Vector v = estimate_gradient_vt(s, *p, full_inner_value(*p, x), full_inner_jacobian(*p, x), all);
    const double scale = std::max({1.0, l2_norm(s.grad_f_s), l2_norm(full_gradient(*p, x))});
    CHECK(sup_diff(v, full_gradient(*p, x)) <= 1e-12 * scale);
  }
}

TEST_CASE("value and Jacobian estimators are unbiased") {
  Instances inst;
  RngStream rng(5);
  const std::size_t draws = 100000;
  for (const CompositionProblem* p : {static_cast<const CompositionProblem*>(&inst.portfolio.front()),
                                      static_cast<const CompositionProblem*>(&inst.policy.front()),
                                      static_cast<const CompositionProblem*>(&inst.linquad.front())}) {
    CAPTURE(p->kind());
    for (int point = 0; point < 5; ++point) {
      const Snapshot s = take_snapshot(*p, random_vec(rng, p->dim_x()));
      const Vector x = random_vec(rng, p->dim_x());
      const Vector G = full_inner_value(*p, x);
      const Matrix J = full_inner_jacobian(*p, x);
      Moments mg(p->dim_y()), mj(J.size());
      for (std::size_t k = 0; k < draws; ++k) {
        mg.add(estimate_inner_value(s, *p, x, draw(rng, p->n2(), 5)));
        mj.add(estimate_inner_jacobian(s, *p, x, draw(rng, p->n2(), 5)).flat());
      }
      for (std::size_t r = 0; r < G.size(); ++r) {
        CHECK(std::fabs(mg.mean(r) - G[r]) <= 4 * mg.se(r) + 1e-12 * (1 + std::fabs(G[r])));
      }
      for (std::size_t r = 0; r < J.size(); ++r) {
        CHECK(std::fabs(mj.mean(r) - J.flat()[r]) <= 4 * mj.se(r) + 1e-12 * (1 + std::fabs(J.flat()[r])));
      }
    }
  }
}

TEST_CASE("the composed gradient estimate is biased under a curved outer map") {
  RngStream rng(6);
  const ExpOuterProblem p(6, 8, 3, 2, rng);
  const Vector xt(2);
  const Vector x{0.6, -0.5};
  const Snapshot s = take_snapshot(p, xt);
  const Vector truth = full_gradient(p, x);
  Moments mv(2);
  for (int k = 0; k < 100000; ++k) {
    const Vector G = estimate_inner_value(s, p, x, draw(rng, p.n2(), 1));
    const Matrix J = estimate_inner_jacobian(s, p, x, draw(rng, p.n2(), 1));
    mv.add(estimate_gradient_vt(s, p, G, J, draw(rng, p.n1(), 1)));
  }
  double worst = 0;
  for (std::size_t c = 0; c < 2; ++c) worst = std::max(worst, std::fabs(mv.mean(c) - truth[c]) / mv.se(c));
  CHECK(worst > 5.0);
}

TEST_CASE("estimator error grows with distance from the snapshot") {
  Instances inst;
  const LinQuadProblem& p = inst.linquad.front();
  RngStream rng(7);
  const Vector xt = random_vec(rng, p.dim_x());
  const Vector dir = random_vec(rng, p.dim_x());
  const Snapshot s = take_snapshot(p, xt);
  std::vector<double> medians;
  for (double dist : {0.01, 0.1, 1.0}) {
    Vector x = xt;
    axpy(dist / l2_norm(dir), dir, x.span());
    const Vector truth = full_gradient(p, x);
    std::vector<double> err;
    for (int k = 0; k < 100; ++k) {
      const Vector G = estimate_inner_value(s, p, x, draw(rng, p.n2(), 2));
      const Matrix J = estimate_inner_jacobian(s, p, x, draw(rng, p.n2(), 2));
      const Vector v = estimate_gradient_vt(s, p, G, J, draw(rng, p.n1(), 2));
      err.push_back(l2_norm_sq((v - truth).span()));
    }
    std::nth_element(err.begin(), err.begin() + 50, err.end());
    medians.push_back(err[50]);
  }
  CHECK(medians[0] < medians[1]);
  CHECK(medians[1] < medians[2]);
}

TEST_CASE("vrsc_pg stays put at a quadratic's optimum") {
  Instances inst;
  const LinQuadProblem& p = inst.linquad.front();
  VrscpgConfig c;
  c.eta = 0.05;
  c.m = 20;
  c.epochs = 5;
  c.x0 = p.closed_form_optimum();
  const SolveResult r = vrsc_pg(p, Regularizer::zero(), c, keep_all());
  for (const Vector& x : r.iterates) CHECK(sup_diff(x, *c.x0) <= 1e-10);
}

TEST_CASE("full passes reduce vrsc_pg to proximal gradient descent") {
  Instances inst;
  const LinQuadProblem& p = inst.linquad.front();
  for (const Regularizer& h : {Regularizer::zero(), Regularizer::l1(0.05)}) {
    VrscpgConfig c;
    c.eta = 0.1;
    c.m = 1;
    c.epochs = 50;
    c.A = c.B = p.n2();
    c.b1 = p.n1();
    c.sampling = SamplingMode::full_pass;
    ProxFullGradientConfig g;
    g.eta = 0.1;
    g.iters = 50;
    const auto a = vrsc_pg(p, h, c, keep_all()).iterates;
    const auto b = prox_full_gradient(p, h, g, keep_all()).iterates;
    REQUIRE(a.size() == 51);
    REQUIRE(b.size() == 51);
    for (std::size_t t = 0; t < a.size(); ++t) CHECK(sup_diff(a[t], b[t]) <= 1e-12);
  }

  VrscpgConfig bad;
  bad.sampling = SamplingMode::full_pass;
  CHECK_THROWS_AS(vrsc_pg(p, Regularizer::zero(), bad), DomainError);
}

TEST_CASE("configuration validation") {
  Instances inst;
  const CompositionProblem& p = inst.portfolio.front();
  const Regularizer h = Regularizer::zero();
  VrscpgConfig v;
  v.m = 0;
  CHECK_THROWS_AS(vrsc_pg(p, h, v), DomainError);
  v = VrscpgConfig{};
  v.eta = 0;
  CHECK_THROWS_AS(vrsc_pg(p, h, v), DomainError);
  v = VrscpgConfig{};
  v.x0 = Vector(p.dim_x() + 1);
  CHECK_THROWS_AS(vrsc_pg(p, h, v), DomainError);

  ScpgConfig s;
  s.alpha0 = -1;
  CHECK_THROWS_AS(scpg_baseline(p, h, s), DomainError);
  s = ScpgConfig{};
  s.exp_alpha = 1.5;
  CHECK_THROWS_AS(scpg_baseline(p, h, s), DomainError);

  ProxSvrgConfig q;
  q.epochs = 0;
  CHECK_THROWS_AS(prox_svrg(inst.lasso.front(), h, q), DomainError);

  ProxFullGradientConfig g;
  g.eta = -1;
  CHECK_THROWS_AS(prox_full_gradient(p, h, g), DomainError);
}

TEST_CASE("runs are deterministic in the seed") {
  Instances inst;
  const Regularizer h = Regularizer::l1(1e-3);
  for (const CompositionProblem* p : inst.all()) {
    VrscpgConfig c;
    c.eta = 0.01;
    c.m = 10;
    c.epochs = 3;
    c.seed = 77;
    const auto a = vrsc_pg(*p, h, c, keep_all()).iterates;
    CHECK(a == vrsc_pg(*p, h, c, keep_all()).iterates);
    c.seed = 78;
    CHECK(a != vrsc_pg(*p, h, c, keep_all()).iterates);

    ScpgConfig s;
    s.alpha0 = 0.01;
    s.iters = 100;
    s.seed = 3;
    CHECK(scpg_baseline(*p, h, s, keep_all()).iterates == scpg_baseline(*p, h, s, keep_all()).iterates);
  }
}

TEST_CASE("scpg with one inner component and constant averaging is a plain gradient step") {
  RngStream rng(8);
  LinQuadSpec spec;
  spec.n1 = 1;
  spec.n2 = 1;
  spec.dim_x = 3;
  spec.dim_y = 4;
  const LinQuadProblem p = gen_linquad(spec, rng);
  const Regularizer h = Regularizer::l1(0.1);
  ScpgConfig s;
  s.alpha0 = 0.2;
  s.beta0 = 1.0;
  s.exp_beta = 0.0;
  s.iters = 30;
  const auto it = scpg_baseline(p, h, s, keep_all()).iterates;
  REQUIRE(it.size() == 31);

  std::vector<double> x(3, 0.0);
  for (std::size_t t = 0; t < 30; ++t) {
    const double alpha = 0.2 / std::pow(1.0 + static_cast<double>(t), 0.75);
    const std::vector<double> g = naive_gradient(p, x);
    for (std::size_t c = 0; c < 3; ++c) x[c] = soft(x[c] - alpha * g[c], alpha * 0.1);
    CHECK(sup_diff(it[t + 1], x) <= 1e-12);
  }
}

TEST_CASE("scpg makes progress on a quadratic") {
  Instances inst;
  const LinQuadProblem& p = inst.linquad.front();
  ScpgConfig s;
  s.alpha0 = 0.5 / p.constants(1.0).L_f;
  s.iters = 20000;
  s.seed = 4;
  TraceOptions o;
  o.stride = 0;
  o.x_star = compute_reference_optimum(p, Regularizer::zero());
  const SolveResult r = scpg_baseline(p, Regularizer::zero(), s, o);
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace.back().gap < 0.1 * r.trace.front().gap);
}

TEST_CASE("prox_svrg") {
  Instances inst;
  const LassoProblem& ls = inst.lasso.front();
  const double lambda = 0.05;
  const Regularizer h = Regularizer::l1(lambda);
  const double eta = 0.5 / ls.smoothness();

  // One inner step per epoch is taken at the snapshot, where v = f' exactly.
  ProxSvrgConfig q;
  q.eta = eta;
  q.m = 1;
  q.epochs = 40;
  const auto it = prox_svrg(ls, h, q, keep_all()).iterates;
  const auto ref = ista(ls, lambda, eta, 40);
  CHECK(sup_diff(it.back(), ref) <= 1e-12);

  // A single component: a deterministic proximal gradient method.
  const LassoProblem one = make_lasso(Matrix::from(1, 2, {1.0, -2.0}), Vector{3.0});
  q.eta = 0.1;
  q.m = 7;
  q.epochs = 3;
  const auto it1 = prox_svrg(one, h, q, keep_all()).iterates;
  const auto ref1 = ista(one, lambda, 0.1, 21);
  CHECK(sup_diff(it1.back(), ref1) <= 1e-12);

  // Converged stochastic runs agree with ISTA run to convergence.
  q.eta = 0.1 / ls.max_component_smoothness();
  q.m = 2 * ls.n();
  q.epochs = 300;
  q.seed = 12;
  const Vector x = prox_svrg(ls, h, q, keep_all()).x_final;
  CHECK(sup_diff(x, ista(ls, lambda, 1.0 / ls.smoothness(), 20000)) <= 1e-8);
}

TEST_CASE("prox_full_gradient") {
  Instances inst;
  const LinQuadProblem& lq = inst.linquad.front();
  ProxFullGradientConfig g;
  g.eta = 0.5 / lq.constants(1.0).L_f;
  g.iters = 200000;
  g.tol = 1e-14;
  const SolveResult r = prox_full_gradient(lq, Regularizer::zero(), g, keep_all());
  CHECK(r.stop == StopReason::converged);
  CHECK(sup_diff(r.x_final, lq.closed_form_optimum()) <= 1e-8);

  // Starting at the fixed point stops after one step.
  g.x0 = r.x_final;
  g.tol = 1e-12;
  const SolveResult again = prox_full_gradient(lq, Regularizer::zero(), g, keep_all());
  CHECK(again.stop == StopReason::converged);
  CHECK(again.iterations <= 1);

  const PolicyEvalProblem& pe = inst.policy.front();
  ProxFullGradientConfig pg;
  pg.eta = 1.0 / estimate_smoothness(pe, Vector(pe.dim_x()));
  pg.iters = 1000000;
  pg.tol = 1e-13;
  const Vector v = prox_full_gradient(pe, Regularizer::zero(), pg, keep_all()).x_final;
  CHECK(sup_diff(v, pe.exact_value_function()) <= 1e-6);
}

TEST_CASE("linear decrease on a strongly convex quadratic") {
  RngStream rng(9);
  const LinQuadProblem p = gen_linquad(LinQuadSpec{}, rng);
  const Regularizer h = Regularizer::l1(1e-2);
  VrscpgConfig c;
  c.eta = 0.5 / p.constants(1.0).L_f;
  c.m = 50;
  c.epochs = 25;
  c.seed = 1;
  TraceOptions o;
  o.stride = 0;
  o.x_star = compute_reference_optimum(p, h);
  REQUIRE(o.x_star->verified);
  const SolveResult r = vrsc_pg(p, h, c, o);
  REQUIRE(r.trace.size() == 26);
  for (std::size_t e = 1; e < 6; ++e) CHECK(r.trace[e].gap < r.trace[e - 1].gap);
  CHECK(r.trace.back().gap <= 1e-8);
}

TEST_CASE("portfolio at full scale converges over epochs") {
  RngStream rng(10);
  const PortfolioProblem p(gen_gaussian_rewards(2000, 200, 2.0, rng));
  VrscpgConfig c;
  c.eta = 0.01;
  c.m = 100;
  c.epochs = 4;
  c.A = c.B = c.b1 = 5;
  c.seed = 1;
  TraceOptions o;
  o.stride = 0;
  const SolveResult r = vrsc_pg(p, Regularizer::l1(1e-3), c, o);
  REQUIRE(r.trace.size() == 5);
  for (std::size_t e = 1; e < r.trace.size(); ++e) CHECK(r.trace[e].objective < r.trace[e - 1].objective);
}

TEST_CASE("divergence aborts with the finite prefix") {
  Instances inst;
  const CompositionProblem& p = inst.portfolio.front();
  VrscpgConfig c;
  c.eta = 1e6;
  c.m = 10;
  c.epochs = 1000;
  TraceOptions o;
  o.keep_iterates = true;
  try {
    vrsc_pg(p, Regularizer::zero(), c, o);
    FAIL("expected divergence");
  } catch (const DivergedError& e) {
    const SolveResult& part = e.partial();
    REQUIRE(!part.trace.empty());
    CHECK(part.iterates.size() == part.iterations + 1);
    for (const Vector& x : part.iterates) CHECK(x.all_finite());
    CHECK(part.x_final.all_finite());
  }

  ScpgConfig s;
  s.alpha0 = 1e8;
  s.exp_alpha = 0;
  s.iters = 100000;
  CHECK_THROWS_AS(scpg_baseline(p, Regularizer::zero(), s), DivergedError);
}

TEST_CASE("budgets stop runs") {
  Instances inst;
  const CompositionProblem& p = inst.portfolio.front();
  VrscpgConfig c;
  c.eta = 1e-3;
  c.m = 10;
  c.epochs = 100000000;
  TraceOptions o;
  o.stride = 0;
  o.max_wall_seconds = 0.2;
  const SolveResult r = vrsc_pg(p, Regularizer::zero(), c, o);
  CHECK(r.stop == StopReason::wall_budget);

  o.max_wall_seconds = 0;
  o.max_queries = 5000;
  const SolveResult q = vrsc_pg(p, Regularizer::zero(), c, o);
  CHECK(q.stop == StopReason::query_budget);
  CHECK(q.counts.total() <= 5000);
  CHECK(q.trace.back().queries() == q.counts.total());
}

TEST_CASE("trace rows are monotone") {
  Instances inst;
  const CompositionProblem& p = inst.policy.front();
  VrscpgConfig c;
  c.eta = 0.05;
  c.m = 20;
  c.epochs = 5;
  TraceOptions o;
  o.stride = 3;
  const SolveResult r = vrsc_pg(p, Regularizer::l1(1e-3), c, o);
  // Start, every third step, and each epoch end.
  CHECK(r.trace.size() == 1 + 5 * 7);
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    CHECK(r.trace[k].wall_ms >= r.trace[k - 1].wall_ms);
    CHECK(r.trace[k].q_inner_val >= r.trace[k - 1].q_inner_val);
    CHECK(r.trace[k].q_inner_jac >= r.trace[k - 1].q_inner_jac);
    CHECK(r.trace[k].q_outer_grad >= r.trace[k - 1].q_outer_grad);
  }
  CHECK(std::isnan(r.trace.front().gap));
  CHECK(to_string(StopReason::query_budget) == "query_budget");
}

TEST_CASE("reference optimum and smoothness estimate") {
  Instances inst;
  const LinQuadProblem& lq = inst.linquad.front();
  const double L = estimate_smoothness(lq, Vector(lq.dim_x()));
  CHECK(L > 0);
  const ReferenceOptimum ref = compute_reference_optimum(lq, Regularizer::zero());
  CHECK(ref.verified);
  CHECK(ref.residual <= kOptimumTolerance);
  CHECK(sup_diff(ref.x, lq.closed_form_optimum()) <= 1e-8);
  CHECK(std::fabs(ref.objective - lq.optimal_value()) <= 1e-10);
}
