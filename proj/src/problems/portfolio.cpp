#include <algorithm>
#include <cmath>

#include "composolve/errors.hpp"
#include "composolve/problems.hpp"

namespace composolve {

PortfolioProblem::PortfolioProblem(Matrix rewards) : rewards_(std::move(rewards)) {
  if (rewards_.rows() == 0 || rewards_.cols() == 0) {
    throw DomainError("portfolio: reward matrix must be nonempty");
  }
  for (double r : rewards_.flat()) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw DomainError("portfolio: rewards must be finite and strictly positive");
    }
  }
}

void PortfolioProblem::do_inner_value(std::size_t j, std::span<const double> x,
                                      std::span<double> out) const {
  const std::size_t N = dim_x();
  std::copy(x.begin(), x.end(), out.begin());
  out[N] = dot(rewards_.row(j), x);
}

void PortfolioProblem::do_inner_jacobian(std::size_t j, std::span<const double> /*x*/,
                                         Matrix& out) const {
  const std::size_t N = dim_x();
  out.fill(0.0);
  for (std::size_t k = 0; k < N; ++k) out(k, k) = 1.0;
  const auto r = rewards_.row(j);
  std::copy(r.begin(), r.end(), out.row(N).begin());
}

double PortfolioProblem::do_outer_value(std::size_t i, std::span<const double> y) const {
  const std::size_t N = dim_x();
  const double ret = dot(rewards_.row(i), y.first(N));
  const double dev = ret - y[N];
  return -ret + dev * dev;
}

void PortfolioProblem::do_outer_gradient(std::size_t i, std::span<const double> y,
                                         std::span<double> out) const {
  const std::size_t N = dim_x();
  const auto r = rewards_.row(i);
  const double dev = dot(r, y.first(N)) - y[N];
  const double w_scale = 2.0 * dev - 1.0;
  for (std::size_t k = 0; k < N; ++k) out[k] = w_scale * r[k];
  out[N] = -2.0 * dev;
}

PortfolioProblem make_portfolio(Matrix rewards) { return PortfolioProblem(std::move(rewards)); }

}  // namespace composolve
