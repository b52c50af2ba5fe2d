#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "routing/interval_set.hpp"

using namespace routing;

namespace {

Rational r(long long p, long long q) { return Rational(p, q); }

// Membership oracle: checks set algebra pointwise on a fine grid,
// independently of the interval representation.
bool grid_agrees(const IntervalSet& got, auto&& predicate) {
  for (int i = 0; i < 2000; ++i) {
    Rational x(2 * i + 1, 4000);  // midpoints, avoids endpoint ambiguity
    if (got.contains(x) != predicate(x)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("single interval basics") {
  auto s = IntervalSet::interval(r(1, 4), r(3, 4));
  CHECK(s.measure() == r(1, 2));
  CHECK(s.contains(r(1, 4)));
  CHECK(!s.contains(r(3, 4)));  // half-open
  CHECK(!s.contains(r(1, 8)));
  CHECK(IntervalSet::interval(r(1, 2), r(1, 2)).is_empty());
  CHECK(IntervalSet::full().measure() == 1);
  CHECK_THROWS_AS(IntervalSet::interval(r(3, 4), r(1, 4)), EngineError);
  CHECK_THROWS_AS(IntervalSet::interval(r(1, 2), r(5, 4)), EngineError);
}

TEST_CASE("normalization merges touching and overlapping parts") {
  auto s = IntervalSet::from_intervals({{r(1, 2), r(3, 4)}, {r(0, 1), r(1, 4)}, {r(1, 4), r(1, 2)}});
  CHECK(s.parts().size() == 1);
  CHECK(s.parts()[0] == Interval{r(0, 1), r(3, 4)});

  auto a = IntervalSet::interval(r(0, 1), r(1, 4)).unite(IntervalSet::interval(r(1, 4), r(1, 2)));
  CHECK(a == IntervalSet::interval(r(0, 1), r(1, 2)));
}

TEST_CASE("set algebra matches a pointwise oracle") {
  auto a = IntervalSet::from_intervals({{r(0, 1), r(1, 5)}, {r(2, 5), r(7, 10)}});
  auto b = IntervalSet::from_intervals({{r(1, 10), r(1, 2)}, {r(3, 5), r(9, 10)}});

  auto in_a = [&](const Rational& x) { return a.contains(x); };
  auto in_b = [&](const Rational& x) { return b.contains(x); };

  CHECK(grid_agrees(a.unite(b), [&](const Rational& x) { return in_a(x) || in_b(x); }));
  CHECK(grid_agrees(a.intersect(b), [&](const Rational& x) { return in_a(x) && in_b(x); }));
  CHECK(grid_agrees(a.subtract(b), [&](const Rational& x) { return in_a(x) && !in_b(x); }));
  CHECK(grid_agrees(a.complement(), [&](const Rational& x) { return !in_a(x); }));
}

TEST_CASE("measure is additive under disjoint union and complement") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Interval> parts;
    int pieces = 1 + int(rng() % 4);
    for (int i = 0; i < pieces; ++i) {
      long long lo = (long long)(rng() % 1000);
      long long hi = lo + 1 + (long long)(rng() % (unsigned long long)(1000 - lo));
      parts.push_back({Rational(lo, 1000), Rational(hi, 1000)});
    }
    auto s = IntervalSet::from_intervals(parts);
    CHECK(s.measure() + s.complement().measure() == 1);
    CHECK(s.intersect(s.complement()).is_empty());
    CHECK(s.unite(s.complement()) == IntervalSet::full());
  }
}

TEST_CASE("wrap window splits into at most two parts") {
  auto plain = wrap_window(r(1, 4), r(1, 2));
  CHECK(plain == IntervalSet::interval(r(1, 4), r(3, 4)));

  auto wrapped = wrap_window(r(3, 4), r(1, 2));
  CHECK(wrapped == IntervalSet::interval(r(3, 4), r(1, 1)).unite(IntervalSet::interval(r(0, 1), r(1, 4))));
  CHECK(wrapped.measure() == r(1, 2));

  CHECK(wrap_window(r(1, 3), r(0, 1)).is_empty());
  CHECK(wrap_window(r(1, 3), r(1, 1)) == IntervalSet::full());
  CHECK_THROWS_AS(wrap_window(r(1, 1), r(1, 2)), EngineError);
}

TEST_CASE("slice by measure walks the set as a circle") {
  // Set with a hole: [0, 1/4) u [1/2, 1) has measure 3/4.
  auto s = IntervalSet::interval(r(0, 1), r(1, 4)).unite(IntervalSet::interval(r(1, 2), r(1, 1)));

  // First half-measure from offset 0: [0, 1/4) plus [1/2, 5/8).
  auto first = s.slice_by_measure(r(0, 1), r(3, 8));
  CHECK(first == IntervalSet::interval(r(0, 1), r(1, 4)).unite(IntervalSet::interval(r(1, 2), r(5, 8))));

  // Offset past the first piece.
  auto mid = s.slice_by_measure(r(1, 4), r(1, 4));
  CHECK(mid == IntervalSet::interval(r(1, 2), r(3, 4)));

  // Wrapping slice: offset 5/8 of 3/4 total, length 1/4 wraps to the start.
  auto wrap = s.slice_by_measure(r(5, 8), r(1, 4));
  CHECK(wrap.measure() == r(1, 4));
  CHECK(wrap == IntervalSet::interval(r(0, 1), r(1, 8)).unite(IntervalSet::interval(r(7, 8), r(1, 1))));

  // Offsets reduce modulo the total measure.
  CHECK(s.slice_by_measure(r(3, 4), r(1, 4)) == s.slice_by_measure(r(0, 1), r(1, 4)));
  CHECK_THROWS_AS(s.slice_by_measure(r(0, 1), r(7, 8)), EngineError);
}

TEST_CASE("slice preserves measure and membership on random sets") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    long long a = rng() % 500;
    long long b = a + 1 + rng() % (500 - a);
    long long c = 501 + rng() % 400;
    long long d = c + 1 + rng() % (1001 - c);
    auto s = IntervalSet::from_intervals({{Rational(a, 1000), Rational(b, 1000)},
                                          {Rational(c, 1000), Rational(d, 1000)}});
    Rational total = s.measure();
    Rational offset(rng() % 2000, 1000);
    Rational len = total * Rational(1 + rng() % 7, 8);
    auto piece = s.slice_by_measure(offset, len);
    CHECK(piece.measure() == len);
    CHECK(piece.intersect(s) == piece);
    // Complement slice within the circle: the rest of the measure.
    Rational rest = total - len;
    auto other = s.slice_by_measure(offset + len, rest);
    CHECK(other.measure() == rest);
    CHECK(piece.intersect(other).is_empty());
    CHECK(piece.unite(other) == s);
  }
}
