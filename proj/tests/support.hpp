#pragma once

// Shared fixtures and independent oracles for the unit tests.

#include <cmath>
#include <functional>
#include <vector>

#include "composolve/problems.hpp"

namespace testing_support {

using namespace composolve;

inline Vector random_vec(RngStream& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * rng.next_normal();
  return v;
}

// Plain central differences, written independently of the library helper.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double keep = x[k];
    x[k] = keep + h;
    const double up = f(x);
    x[k] = keep - h;
    const double down = f(x);
    x[k] = keep;
    g[k] = (up - down) / (2 * h);
  }
  return g;
}

inline double rel_err(std::span<const double> a, std::span<const double> b) {
  double num = 0, den = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

// G(x) and grad G(x) by direct averaging of the components.
inline std::vector<double> naive_inner(const CompositionProblem& p, std::span<const double> x) {
  std::vector<double> g(p.dim_y(), 0.0);
  for (std::size_t j = 0; j < p.n2(); ++j) {
    const Vector v = p.inner_value(j, x);
    for (std::size_t r = 0; r < g.size(); ++r) g[r] += v[r];
  }
  for (double& v : g) v /= static_cast<double>(p.n2());
  return g;
}

inline std::vector<double> naive_jacobian(const CompositionProblem& p,
                                          std::span<const double> x) {
  std::vector<double> J(p.dim_y() * p.dim_x(), 0.0);
  for (std::size_t j = 0; j < p.n2(); ++j) {
    const Matrix m = p.inner_jacobian(j, x);
    for (std::size_t k = 0; k < J.size(); ++k) J[k] += m.flat()[k];
  }
  for (double& v : J) v /= static_cast<double>(p.n2());
  return J;
}

// grad f(x) = J^T (1/n1) sum_i grad F_i(G(x)), accumulated by hand.
inline std::vector<double> naive_gradient(const CompositionProblem& p,
                                          std::span<const double> x) {
  const std::vector<double> g = naive_inner(p, x);
  const std::vector<double> J = naive_jacobian(p, x);
  std::vector<double> outer(p.dim_y(), 0.0);
  for (std::size_t i = 0; i < p.n1(); ++i) {
    const Vector v = p.outer_gradient(i, g);
    for (std::size_t r = 0; r < outer.size(); ++r) outer[r] += v[r];
  }
  for (double& v : outer) v /= static_cast<double>(p.n1());
  std::vector<double> grad(p.dim_x(), 0.0);
  for (std::size_t r = 0; r < p.dim_y(); ++r) {
    for (std::size_t c = 0; c < p.dim_x(); ++c) grad[c] += J[r * p.dim_x() + c] * outer[r];
  }
  return grad;
}

inline double naive_f(const CompositionProblem& p, std::span<const double> x) {
  const std::vector<double> g = naive_inner(p, x);
  double sum = 0;
  for (std::size_t i = 0; i < p.n1(); ++i) sum += p.outer_value(i, g);
  return sum / static_cast<double>(p.n1());
}

inline double soft(double x, double t) {
  return x > t ? x - t : (x < -t ? x + t : 0.0);
}

// Small instances of every kind.
struct Instances {
  explicit Instances(std::uint64_t seed = 11) {
    RngStream rng(seed);
    portfolio.emplace_back(gen_gaussian_rewards(30, 6, 3.0, rng));
    MdpData mdp = gen_mdp(8, 3, rng);
    policy.emplace_back(std::move(mdp.transitions), std::move(mdp.rewards), 0.9);
    LinQuadSpec spec;
    spec.n1 = 7;
    spec.n2 = 9;
    spec.dim_y = 5;
    spec.dim_x = 4;
    linquad.push_back(gen_linquad(spec, rng));
    lasso.push_back(gen_lasso(25, 6, 0.1, rng));
    lasso_comp.emplace_back(lasso.front());
  }
  Instances(const Instances&) = delete;
  Instances& operator=(const Instances&) = delete;

  std::vector<const CompositionProblem*> all() const {
    return {&portfolio.front(), &policy.front(), &linquad.front(), &lasso_comp.front()};
  }
  std::vector<PortfolioProblem> portfolio;
  std::vector<PolicyEvalProblem> policy;
  std::vector<LinQuadProblem> linquad;
  std::vector<LassoProblem> lasso;
  std::vector<FiniteSumComposition> lasso_comp;
};

}  // namespace testing_support
