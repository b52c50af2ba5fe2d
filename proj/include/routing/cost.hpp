#pragma once

#include <string>

#include "routing/scalar.hpp"

namespace routing {

/// Per-edge latency as a function of the edge's flow. Three kinds:
///   constant:  c(x) = b
///   affine:    c(x) = a*x + b
///   monomial:  c(x) = a*x^p + b, integer p >= 1
/// Coefficients are non-negative rationals, so every instance is
/// non-decreasing by construction; construction re-checks this on a fixed
/// sample grid as a guard against future kinds.
class CostFunction {
 public:
  enum class Kind { constant, affine, monomial };

  static CostFunction constant(Rational b);
  static CostFunction affine(Rational a, Rational b);
  static CostFunction monomial(Rational a, unsigned exponent, Rational b);

  Kind kind() const { return kind_; }
  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  unsigned exponent() const { return exponent_; }

  /// Evaluates at flow x in the requested scalar type. Rational
  /// instantiation is exact for all kinds (integer exponents).
  template <GameScalar S>
  S evaluate(const S& x) const;

  bool operator==(const CostFunction&) const = default;

  std::string describe() const;

 private:
  CostFunction(Kind kind, Rational a, unsigned exponent, Rational b);
  Kind kind_;
  Rational a_;
  unsigned exponent_ = 1;
  Rational b_;
};

}  // namespace routing
