#pragma once

#include <utility>
#include <vector>

#include "routing/rational.hpp"

namespace routing {

/// Half-open interval [lo, hi) with 0 <= lo < hi <= 1.
struct Interval {
  Rational lo;
  Rational hi;
  bool operator==(const Interval&) const = default;
};

/// Finite union of disjoint half-open subintervals of [0, 1), kept sorted
/// and merged so that equal sets have equal representations. Endpoints are
/// always exact rationals; set algebra and measures are exact.
class IntervalSet {
 public:
  IntervalSet() = default;

  /// Single interval [lo, hi). lo == hi yields the empty set.
  static IntervalSet interval(const Rational& lo, const Rational& hi);
  static IntervalSet empty() { return IntervalSet(); }
  static IntervalSet full() { return interval(Rational(0), Rational(1)); }
  /// Builds from arbitrary (possibly overlapping, unsorted) intervals.
  static IntervalSet from_intervals(std::vector<Interval> parts);

  const std::vector<Interval>& parts() const { return parts_; }
  bool is_empty() const { return parts_.empty(); }
  Rational measure() const;

  bool contains(const Rational& point) const;

  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet subtract(const IntervalSet& other) const;
  /// Complement within [0, 1).
  IntervalSet complement() const;

  bool disjoint_from(const IntervalSet& other) const;

  /// Measure-parameterized sub-selection: treats this set as a circle of
  /// circumference measure() and returns the subset spanning measure
  /// positions [offset, offset + length), wrapping around. Requires
  /// 0 <= length <= measure(); offset is taken modulo measure().
  IntervalSet slice_by_measure(const Rational& offset, const Rational& length) const;

  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<Interval> parts_;
  void normalize();
};

/// Rotation window [b, b + fraction) on the unit circle, as a subset of
/// [0, 1): wraps into at most two intervals. fraction must be in [0, 1].
IntervalSet wrap_window(const Rational& pointer, const Rational& fraction);

}  // namespace routing
