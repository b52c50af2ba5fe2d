#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace routing {

/// Exact arbitrary-precision rational. All measure arithmetic (intervals,
/// flows, partition shares) is carried in this type regardless of the
/// configured number mode; only cost evaluation switches to double.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Thrown for every contract violation the engine can detect: malformed
/// input, precondition failures, invalid assignments, and so on.
class EngineError : public std::runtime_error {
 public:
  explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses "p/q", an integer literal, or a plain decimal ("0.99") into an
/// exact rational. Throws EngineError on malformed input or q == 0.
Rational parse_rational(const std::string& text);

/// Formats as "p/q", or just "p" for integers. Inverse of parse_rational
/// for canonical values.
std::string format_rational(const Rational& r);

inline double to_double(const Rational& r) { return static_cast<double>(r); }

/// Exact conversion; every finite double is a dyadic rational.
inline Rational rational_from_double(double x) { return Rational(x); }

inline Rational rational_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

/// Largest integer n with n <= r.
BigInt rational_floor(const Rational& r);

}  // namespace routing
