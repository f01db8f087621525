#pragma once

#include <span>
#include <string>

#include "composolve/numerics.hpp"

namespace composolve {

enum class RegularizerKind { zero, l1 };

/// Nonsmooth convex penalty h(x).
///
/// The proximal map uses the convention
///   prox(x, eta) = argmin_z  h(z) + ||z - x||^2 / (2 eta),
/// so the L1 threshold is eta * lambda.
class Regularizer {
 public:
  static Regularizer zero() noexcept { return Regularizer(RegularizerKind::zero, 0.0); }
  /// Throws DomainError unless lambda is finite and >= 0.
  static Regularizer l1(double lambda);

  RegularizerKind kind() const noexcept { return kind_; }
  double lambda() const noexcept { return lambda_; }
  bool is_zero() const noexcept { return kind_ == RegularizerKind::zero; }
  std::string describe() const;

  double value(std::span<const double> x) const;

  /// Throws DomainError if eta <= 0.
  Vector prox(std::span<const double> x, double eta) const;
  /// out may alias x.
  void prox_into(std::span<const double> x, double eta, std::span<double> out) const;

  /// Element g of the subdifferential at x minimizing ||grad_f + g||^2.
  Vector min_norm_subgradient(std::span<const double> x, std::span<const double> grad_f) const;

  friend bool operator==(const Regularizer&, const Regularizer&) = default;

 private:
  Regularizer(RegularizerKind kind, double lambda) noexcept : kind_(kind), lambda_(lambda) {}

  RegularizerKind kind_;
  double lambda_;
};

inline double reg_value(const Regularizer& h, std::span<const double> x) { return h.value(x); }

inline Vector prox(const Regularizer& h, std::span<const double> x, double eta) {
  return h.prox(x, eta);
}

inline Vector min_norm_subgradient(const Regularizer& h, std::span<const double> x,
                                   std::span<const double> grad_f) {
  return h.min_norm_subgradient(x, grad_f);
}

}  // namespace composolve
