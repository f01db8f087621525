#include "composolve/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "composolve/errors.hpp"
#include "composolve/kernels.hpp"

namespace composolve {

Regularizer Regularizer::l1(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw DomainError("Regularizer::l1: lambda must be finite and nonnegative");
  }
  return Regularizer(RegularizerKind::l1, lambda);
}

std::string Regularizer::describe() const {
  if (kind_ == RegularizerKind::zero) return "zero";
  std::ostringstream os;
  os << "l1(lambda=" << lambda_ << ")";
  return os.str();
}

double Regularizer::value(std::span<const double> x) const {
  if (kind_ == RegularizerKind::zero) return 0.0;
  double sum = 0.0;
  for (double v : x) sum += std::fabs(v);
  return lambda_ * sum;
}

Vector Regularizer::prox(std::span<const double> x, double eta) const {
  Vector out(x.size());
  prox_into(x, eta, out.span());
  return out;
}

void Regularizer::prox_into(std::span<const double> x, double eta, std::span<double> out) const {
  if (!(eta > 0.0)) throw DomainError("prox: eta must be positive");
  if (x.size() != out.size()) throw DomainError("prox: output length mismatch");
  if (kind_ == RegularizerKind::zero) {
    if (out.data() != x.data()) std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  kernels::active().soft_threshold(x.data(), eta * lambda_, out.data(), x.size());
}

Vector Regularizer::min_norm_subgradient(std::span<const double> x,
                                         std::span<const double> grad_f) const {
  if (x.size() != grad_f.size()) {
    throw DomainError("min_norm_subgradient: x and grad_f lengths differ");
  }
  Vector g(x.size());
  if (kind_ == RegularizerKind::zero) return g;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) {
      g[i] = lambda_;
    } else if (x[i] < 0.0) {
      g[i] = -lambda_;
    } else {
      g[i] = std::clamp(-grad_f[i], -lambda_, lambda_);
    }
  }
  return g;
}

}  // namespace composolve
