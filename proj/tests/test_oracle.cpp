#include <doctest.h>

#include <thread>

#include "composolve/oracle.hpp"
#include "composolve/solvers.hpp"
#include "support.hpp"

using namespace composolve;
using testing_support::Instances;
using testing_support::random_vec;

namespace {

QueryCounts qc(std::uint64_t v, std::uint64_t j, std::uint64_t g) { return QueryCounts{v, j, g}; }

TraceOptions quiet() {
  TraceOptions o;
  o.record = false;
  return o;
}

}  // namespace

TEST_CASE("each evaluator call is one query of its kind") {
  Instances inst;
  const CompositionProblem& p = inst.linquad.front();
  CountedProblem cp = counted(p);
  const Vector x(p.dim_x()), y(p.dim_y());

  cp.inner_value(0, x);
  CHECK(cp.counts() == qc(1, 0, 0));
  cp.inner_jacobian(1, x);
  CHECK(cp.counts() == qc(1, 1, 0));
  cp.outer_gradient(2, y);
  CHECK(cp.counts() == qc(1, 1, 1));
  cp.outer_value(0, y);
  CHECK(cp.counts() == qc(1, 1, 1));
  CHECK(cp.counts().total() == 3);
  CHECK(cp.counter()->total() == 3);

  // Rejected calls are not counted.
  CHECK_THROWS(cp.inner_value(p.n2(), x));
  CHECK(cp.counts() == qc(1, 1, 1));
}

TEST_CASE("full-batch operations cost one pass per kind") {
  Instances inst;
  for (const CompositionProblem* p : inst.all()) {
    CAPTURE(p->kind());
    CountedProblem cp = counted(*p);
    RngStream rng(1);
    full_gradient(cp, random_vec(rng, p->dim_x()));
    CHECK(cp.counts() == qc(p->n2(), p->n2(), p->n1()));
    objective_f(cp, random_vec(rng, p->dim_x()));
    CHECK(cp.counts() == qc(2 * p->n2(), p->n2(), p->n1()));
  }
}

TEST_CASE("one inner iteration costs (2A, 2B, 2 b1)") {
  Instances inst;
  const CompositionProblem& p = inst.policy.front();
  RngStream rng(2);
  const Vector x0 = random_vec(rng, p.dim_x()), x = random_vec(rng, p.dim_x());
  const Snapshot snap = take_snapshot(p, x0);
  CountedProblem cp = counted(p);
  const std::vector<std::size_t> a{0, 3, 3}, b{1, 2}, i{5, 0, 7, 7};
  const Vector G = estimate_inner_value(snap, cp, x, a);
  const Matrix J = estimate_inner_jacobian(snap, cp, x, b);
  estimate_gradient_vt(snap, cp, G, J, i);
  CHECK(cp.counts() == qc(6, 4, 8));
  CHECK(cp.counts() == vrsc_pg_inner_counts(3, 2, 4));
}

TEST_CASE("closed-form cost helpers") {
  CHECK(vrsc_pg_cost(7, 5, 0, 1, 1, 1, 1) == 17);
  CHECK(vrsc_pg_cost(7, 5, 1, 1, 1, 1, 1) == 23);
  CHECK(vrsc_pg_cost(2000, 2000, 100, 5, 5, 5, 3) == 3 * (6000 + 3000));
  CHECK(vrsc_pg_counts(7, 5, 4, 2, 3, 1, 2) == qc(2 * (5 + 16), 2 * (5 + 24), 2 * (7 + 8)));
  CHECK(vrsc_pg_counts(7, 5, 4, 2, 3, 1, 2, 3) ==
        vrsc_pg_counts(7, 5, 4, 2, 3, 1, 2) + snapshot_counts(7, 5) + 3 * vrsc_pg_inner_counts(2, 3, 1));
  CHECK(snapshot_counts(7, 5) == qc(5, 5, 7));
  CHECK(scpg_counts(9) == qc(9, 9, 9));
  CHECK(prox_svrg_counts(10, 4, 3) == qc(0, 0, 3 * 18));
  CHECK(prox_svrg_counts(10, 4, 3, 2) == qc(0, 0, 3 * 18 + 10 + 4));
  CHECK(prox_full_gradient_counts(7, 5, 4) == qc(20, 20, 28));

  for (std::uint64_t e = 1; e < 5; ++e) {
    CHECK(vrsc_pg_counts(11, 13, 6, 2, 4, 3, e).total() == vrsc_pg_cost(11, 13, 6, 2, 4, 3, e));
  }
}

TEST_CASE("live counts equal the closed forms for every solver") {
  Instances inst;
  RngStream rng(3);
  const Regularizer h = Regularizer::l1(1e-3);
  for (int k = 0; k < 30; ++k) {
    const CompositionProblem& p = *inst.all()[k % 3];
    CAPTURE(k);

    VrscpgConfig v;
    v.eta = 1e-3;
    v.m = 1 + rng.next_index(10);
    v.epochs = 1 + rng.next_index(4);
    v.A = 1 + rng.next_index(7);
    v.B = 1 + rng.next_index(7);
    v.b1 = 1 + rng.next_index(7);
    v.seed = k;
    {
      CountedProblem cp = counted(p);
      const SolveResult res = vrsc_pg(cp, h, v, quiet());
      const QueryCounts want = vrsc_pg_counts(p.n1(), p.n2(), v.m, v.A, v.B, v.b1, v.epochs);
      CHECK(cp.counts() == want);
      CHECK(res.counts == want);
      CHECK(want.total() == vrsc_pg_cost(p.n1(), p.n2(), v.m, v.A, v.B, v.b1, v.epochs));
    }

    ScpgConfig s;
    s.alpha0 = 1e-3;
    s.iters = 1 + rng.next_index(80);
    s.seed = k;
    {
      CountedProblem cp = counted(p);
      CHECK(scpg_baseline(cp, h, s, quiet()).counts == scpg_counts(s.iters));
      CHECK(cp.counts() == scpg_counts(s.iters));
    }

    ProxFullGradientConfig g;
    g.eta = 1e-3;
    g.iters = 1 + rng.next_index(10);
    {
      CountedProblem cp = counted(p);
      const QueryCounts want = prox_full_gradient_counts(p.n1(), p.n2(), g.iters);
      CHECK(prox_full_gradient(cp, h, g, quiet()).counts == want);
      CHECK(cp.counts() == want);
    }

    ProxSvrgConfig q;
    q.eta = 1e-3;
    q.m = 1 + rng.next_index(30);
    q.epochs = 1 + rng.next_index(4);
    q.seed = k;
    {
      const LassoProblem& ls = inst.lasso.front();
      CountedFiniteSum cf(ls, std::make_shared<QueryCounter>());
      const QueryCounts want = prox_svrg_counts(ls.n(), q.m, q.epochs);
      CHECK(prox_svrg(cf, h, q, quiet()).counts == want);
      CHECK(cf.counts() == want);
    }
  }
}

TEST_CASE("budget-limited runs stop on a predictable count") {
  Instances inst;
  const CompositionProblem& p = inst.portfolio.front();
  const Regularizer h = Regularizer::l1(1e-3);
  for (std::uint64_t budget : {50u, 151u, 777u, 2000u}) {
    CAPTURE(budget);
    VrscpgConfig v;
    v.eta = 1e-3;
    v.m = 7;
    v.epochs = 1000;
    v.A = 2;
    v.B = 3;
    v.b1 = 4;
    TraceOptions o = quiet();
    o.max_queries = budget;
    const SolveResult res = vrsc_pg(p, h, v, o);
    CHECK(res.stop == StopReason::query_budget);
    CHECK(res.counts.total() <= budget);
    CHECK(res.counts.total() + vrsc_pg_inner_counts(2, 3, 4).total() +
              snapshot_counts(p.n1(), p.n2()).total() >
          budget);
    const std::uint64_t extra = res.iterations - res.epochs_completed * v.m;
    const QueryCounts want =
        vrsc_pg_counts(p.n1(), p.n2(), 7, 2, 3, 4, res.epochs_completed, extra);
    CHECK(res.counts == want);

    ScpgConfig s;
    s.alpha0 = 1e-3;
    s.iters = 100000;
    const SolveResult sr = scpg_baseline(p, h, s, o);
    CHECK(sr.counts == scpg_counts(budget / 3));
  }
}

TEST_CASE("wrapping changes no result") {
  Instances inst;
  RngStream rng(4);
  for (const CompositionProblem* p : inst.all()) {
    CountedProblem cp = counted(*p);
    for (int k = 0; k < 10; ++k) {
      const Vector x = random_vec(rng, p->dim_x()), y = random_vec(rng, p->dim_y());
      const std::size_t j = rng.next_index(p->n2()), i = rng.next_index(p->n1());
      CHECK(cp.inner_value(j, x) == p->inner_value(j, x));
      CHECK(cp.inner_jacobian(j, x) == p->inner_jacobian(j, x));
      CHECK(cp.outer_gradient(i, y) == p->outer_gradient(i, y));
      CHECK(cp.outer_value(i, y) == p->outer_value(i, y));
    }
  }
  VrscpgConfig v;
  v.eta = 0.01;
  v.m = 10;
  v.epochs = 3;
  v.seed = 9;
  TraceOptions o;
  o.keep_iterates = true;
  const CompositionProblem& p = inst.portfolio.front();
  CHECK(vrsc_pg(counted(p), Regularizer::l1(1e-3), v, o).iterates ==
        vrsc_pg(p, Regularizer::l1(1e-3), v, o).iterates);
}

TEST_CASE("counts stay exact under concurrent use") {
  Instances inst;
  const CompositionProblem& p = inst.linquad.front();
  CountedProblem cp = counted(p);
  const Vector x(p.dim_x());
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&] {
      for (int k = 0; k < 500; ++k) full_gradient(cp, x);
    });
  }
  for (std::thread& w : workers) w.join();
  CHECK(cp.counts() == 2000 * qc(p.n2(), p.n2(), p.n1()));
}
