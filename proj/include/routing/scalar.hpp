#pragma once

#include <cmath>
#include <concepts>

#include "routing/rational.hpp"

namespace routing {

enum class NumberMode { rational, floating };

template <class S>
concept GameScalar = std::same_as<S, Rational> || std::same_as<S, double>;

/// Comparison policy for the two number modes. Exact mode compares
/// bit-for-bit; float mode uses fixed tolerances (1e-12 for value
/// equality, 1e-9 for decisions such as "strictly profits").
template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational from(const Rational& r) { return r; }
  static bool eq(const Rational& a, const Rational& b) { return a == b; }
  /// Strict decision comparison (profit, improvement). Exact in this mode.
  static bool decisively_less(const Rational& a, const Rational& b) { return a < b; }
  /// Flow-detection tolerance added to the prescribed value.
  static Rational detection_eps() { return Rational(0); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double from(const Rational& r) { return to_double(r); }
  static bool eq(double a, double b) { return std::abs(a - b) <= 1e-12; }
  static bool decisively_less(double a, double b) { return a < b - 1e-9; }
  static Rational detection_eps() { return Rational(1, 1000000000); }
};

}  // namespace routing
