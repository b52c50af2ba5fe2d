#include "routing/interval_set.hpp"

#include <algorithm>

namespace routing {

IntervalSet IntervalSet::interval(const Rational& lo, const Rational& hi) {
  if (lo < 0 || hi > 1 || lo > hi) {
    throw EngineError("interval endpoints must satisfy 0 <= lo <= hi <= 1");
  }
  IntervalSet s;
  if (lo < hi) s.parts_.push_back({lo, hi});
  return s;
}

IntervalSet IntervalSet::from_intervals(std::vector<Interval> parts) {
  IntervalSet s;
  for (auto& p : parts) {
    if (p.lo < 0 || p.hi > 1 || p.lo > p.hi) {
      throw EngineError("interval endpoints must satisfy 0 <= lo <= hi <= 1");
    }
    if (p.lo < p.hi) s.parts_.push_back(std::move(p));
  }
  s.normalize();
  return s;
}

void IntervalSet::normalize() {
  std::sort(parts_.begin(), parts_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (auto& p : parts_) {
    if (!merged.empty() && p.lo <= merged.back().hi) {
      if (p.hi > merged.back().hi) merged.back().hi = p.hi;
    } else {
      merged.push_back(p);
    }
  }
  parts_ = std::move(merged);
}

Rational IntervalSet::measure() const {
  Rational m(0);
  for (const auto& p : parts_) m += p.hi - p.lo;
  return m;
}

bool IntervalSet::contains(const Rational& point) const {
  for (const auto& p : parts_) {
    if (point >= p.lo && point < p.hi) return true;
  }
  return false;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Interval> all = parts_;
  all.insert(all.end(), other.parts_.begin(), other.parts_.end());
  IntervalSet s;
  s.parts_ = std::move(all);
  s.normalize();
  return s;
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  IntervalSet s;
  auto it = other.parts_.begin();
  for (const auto& p : parts_) {
    // other.parts_ is sorted; advance past intervals entirely below p.
    while (it != other.parts_.end() && it->hi <= p.lo) ++it;
    for (auto jt = it; jt != other.parts_.end() && jt->lo < p.hi; ++jt) {
      Rational lo = std::max(p.lo, jt->lo);
      Rational hi = std::min(p.hi, jt->hi);
      if (lo < hi) s.parts_.push_back({lo, hi});
    }
  }
  return s;  // pieces already sorted and disjoint
}

IntervalSet IntervalSet::subtract(const IntervalSet& other) const {
  return intersect(other.complement());
}

IntervalSet IntervalSet::complement() const {
  IntervalSet s;
  Rational cursor(0);
  for (const auto& p : parts_) {
    if (cursor < p.lo) s.parts_.push_back({cursor, p.lo});
    cursor = p.hi;
  }
  if (cursor < 1) s.parts_.push_back({cursor, Rational(1)});
  return s;
}

bool IntervalSet::disjoint_from(const IntervalSet& other) const {
  return intersect(other).is_empty();
}

IntervalSet IntervalSet::slice_by_measure(const Rational& offset, const Rational& length) const {
  Rational total = measure();
  if (length < 0 || length > total) {
    throw EngineError("slice length must be within [0, measure]");
  }
  if (length == 0) return IntervalSet();
  Rational start = offset;
  if (total > 0) {
    // reduce offset modulo total
    Rational q = start / total;
    BigInt whole = rational_floor(q);
    start -= Rational(whole) * total;
  }
  // Walk pieces, skipping `start` of measure, then collecting `length`,
  // wrapping once if needed.
  std::vector<Interval> out;
  Rational skip = start;
  Rational want = length;
  for (int pass = 0; pass < 2 && want > 0; ++pass) {
    for (const auto& p : parts_) {
      if (want == 0) break;
      Rational len = p.hi - p.lo;
      Rational lo = p.lo;
      if (skip > 0) {
        if (skip >= len) {
          skip -= len;
          continue;
        }
        lo += skip;
        len -= skip;
        skip = 0;
      }
      Rational take = std::min(len, want);
      out.push_back({lo, lo + take});
      want -= take;
    }
  }
  return from_intervals(std::move(out));
}

IntervalSet wrap_window(const Rational& pointer, const Rational& fraction) {
  if (fraction < 0 || fraction > 1) {
    throw EngineError("window fraction must be in [0, 1]");
  }
  if (pointer < 0 || pointer >= 1) {
    throw EngineError("window pointer must be in [0, 1)");
  }
  if (fraction == 0) return IntervalSet::empty();
  Rational end = pointer + fraction;
  if (end <= 1) return IntervalSet::interval(pointer, end);
  return IntervalSet::interval(pointer, Rational(1))
      .unite(IntervalSet::interval(Rational(0), end - 1));
}

}  // namespace routing
