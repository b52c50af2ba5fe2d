#include "routing/cost.hpp"

namespace routing {

CostFunction::CostFunction(Kind kind, Rational a, unsigned exponent, Rational b)
    : kind_(kind), a_(std::move(a)), exponent_(exponent), b_(std::move(b)) {
  if (a_ < 0 || b_ < 0) throw EngineError("cost coefficients must be non-negative");
  if (kind_ == Kind::monomial && exponent_ < 1) {
    throw EngineError("monomial exponent must be >= 1");
  }
  // Monotonicity guard on an 11-point grid over [0, 1].
  Rational prev(-1);
  for (int i = 0; i <= 10; ++i) {
    Rational x(i, 10);
    Rational y = evaluate<Rational>(x);
    if (y < prev) throw EngineError("cost function is not non-decreasing");
    prev = y;
  }
}

CostFunction CostFunction::constant(Rational b) {
  return CostFunction(Kind::constant, Rational(0), 1, std::move(b));
}

CostFunction CostFunction::affine(Rational a, Rational b) {
  return CostFunction(Kind::affine, std::move(a), 1, std::move(b));
}

CostFunction CostFunction::monomial(Rational a, unsigned exponent, Rational b) {
  return CostFunction(Kind::monomial, std::move(a), exponent, std::move(b));
}

template <GameScalar S>
S CostFunction::evaluate(const S& x) const {
  S a = ScalarTraits<S>::from(a_);
  S b = ScalarTraits<S>::from(b_);
  switch (kind_) {
    case Kind::constant:
      return b;
    case Kind::affine:
      return a * x + b;
    case Kind::monomial: {
      S pow = x;
      for (unsigned i = 1; i < exponent_; ++i) pow = pow * x;
      return a * pow + b;
    }
  }
  throw EngineError("unreachable cost kind");
}

template Rational CostFunction::evaluate<Rational>(const Rational&) const;
template double CostFunction::evaluate<double>(const double&) const;

std::string CostFunction::describe() const {
  switch (kind_) {
    case Kind::constant:
      return format_rational(b_);
    case Kind::affine:
      return format_rational(a_) + "*x + " + format_rational(b_);
    case Kind::monomial:
      return format_rational(a_) + "*x^" + std::to_string(exponent_) + " + " +
             format_rational(b_);
  }
  return "";
}

}  // namespace routing
