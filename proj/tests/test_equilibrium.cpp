#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "routing/equilibrium.hpp"

using namespace routing;

namespace {

Rational r(long long p, long long q) { return Rational(p, q); }

Partition equal_partition(int n) {
  return Partition(std::vector<Rational>(n, Rational(1, n)));
}

// Random partition with exact unit sum: integer weights over a common total.
Partition random_partition(std::mt19937_64& rng, int max_n = 20) {
  int n = 1 + int(rng() % max_n);
  std::vector<long long> w(n);
  long long total = 0;
  for (auto& x : w) {
    x = 1 + (long long)(rng() % 30);
    total += x;
  }
  std::vector<Rational> shares;
  for (auto x : w) shares.push_back(Rational(x, total));
  return Partition(std::move(shares));
}

// Minimal N with N * gap > 1/2 by direct scan (independent of the
// closed-form floor used by the library).
long long scan_minimal(const Rational& gap) {
  for (long long n = 1;; ++n) {
    if (Rational(n) * gap > Rational(1, 2)) return n;
  }
}

}  // namespace

TEST_CASE("partition validation") {
  CHECK_THROWS_AS(Partition(std::vector<Rational>{}), EngineError);
  CHECK_THROWS_AS(Partition({r(1, 2), r(0, 1), r(1, 2)}), EngineError);
  CHECK_THROWS_AS(Partition({r(1, 2), r(1, 3)}), EngineError);
  Partition p({r(1, 10), r(2, 10), r(7, 10)});
  CHECK(p.size() == 3);
  CHECK(p.share(2) == r(7, 10));
}

TEST_CASE("one-shot planner cost matches worked values") {
  CHECK(one_shot_planner_cost<Rational>(equal_partition(1), {r(1, 2)}, 0) == r(3, 4));
  CHECK(one_shot_planner_cost<Rational>(equal_partition(4),
                                        {r(4, 5), r(4, 5), r(4, 5), r(4, 5)}, 0) == r(21, 25));
  // Zero bottom fraction pays the constant route regardless of the others.
  CHECK(one_shot_planner_cost<Rational>(equal_partition(3), {r(0, 1), r(1, 1), r(1, 3)}, 0) == 1);
  CHECK(one_shot_planner_cost<double>(equal_partition(4), {0.8, 0.8, 0.8, 0.8}, 0) ==
        doctest::Approx(0.84));
  CHECK_THROWS_AS(one_shot_planner_cost<Rational>(equal_partition(2), {r(1, 2)}, 0), EngineError);
  CHECK_THROWS_AS(one_shot_planner_cost<Rational>(equal_partition(2), {r(3, 2), r(0, 1)}, 0),
                  EngineError);
}

TEST_CASE("best response clamps the parabola vertex") {
  CHECK(best_response<Rational>(equal_partition(1), {r(1, 1)}, 0) == r(1, 2));
  CHECK(best_response<Rational>(equal_partition(2), {r(0, 1), r(1, 1)}, 0) == r(1, 2));
  Partition lopsided({r(1, 10), r(9, 10)});
  CHECK(best_response<Rational>(lopsided, {r(1, 1), r(0, 1)}, 0) == 1);
}

TEST_CASE("best response beats a fine grid of alternatives") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    Partition p = random_partition(rng, 6);
    std::vector<Rational> profile;
    for (int i = 0; i < p.size(); ++i) profile.push_back(r(rng() % 401, 400));
    int i = int(rng() % p.size());
    Rational br = best_response<Rational>(p, profile, i);
    auto cost_at = [&](const Rational& l) {
      auto alt = profile;
      alt[i] = l;
      return one_shot_planner_cost<Rational>(p, alt, i);
    };
    Rational at_br = cost_at(br);
    for (int j = 0; j <= 400; ++j) CHECK(at_br <= cost_at(r(j, 400)));
  }
}

TEST_CASE("equal partitions solve to F = n/(n+1)") {
  for (int n = 1; n <= 6; ++n) {
    auto sol = solve_planner_equilibrium<Rational>(equal_partition(n));
    CHECK(sol.bottom_flow == Rational(n, n + 1));
    for (const auto& l : sol.lambdas) CHECK(l == Rational(n, n + 1));
    CHECK(verify_planner_equilibrium<Rational>(equal_partition(n), sol.lambdas, 0).valid);
  }
}

TEST_CASE("heterogeneous shares: smallest planners saturate") {
  Partition p({r(1, 10), r(2, 10), r(7, 10)});
  auto sol = solve_planner_equilibrium<Rational>(p);
  CHECK(sol.bottom_flow == r(13, 20));
  CHECK(sol.lambdas == std::vector<Rational>{r(1, 1), r(1, 1), r(1, 2)});
  CHECK(verify_planner_equilibrium<Rational>(p, sol.lambdas, 0).valid);

  // Caller order is preserved; sorting happens only inside the solver.
  Partition shuffled({r(7, 10), r(1, 10), r(2, 10)});
  auto sol2 = solve_planner_equilibrium<Rational>(shuffled);
  CHECK(sol2.lambdas == std::vector<Rational>{r(1, 2), r(1, 1), r(1, 1)});
  CHECK(sol2.bottom_flow == r(13, 20));
}

TEST_CASE("equilibrium verification produces an improving witness on failure") {
  Partition p = equal_partition(4);
  auto check = verify_planner_equilibrium<Rational>(p, {r(1, 2), r(1, 2), r(1, 2), r(1, 2)},
                                                    Rational(0));
  REQUIRE_FALSE(check.valid);
  CHECK(check.planner == 0);
  CHECK(check.better_lambda == 1);
  CHECK(check.cost_drop == r(1, 8));

  auto ok = verify_planner_equilibrium<Rational>(Partition({r(1, 1)}), {r(1, 2)}, Rational(0));
  CHECK(ok.valid);
}

TEST_CASE("fixed-point identity and saturation structure") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    Partition p = random_partition(rng);
    auto sol = solve_planner_equilibrium<Rational>(p);
    const Rational F = sol.bottom_flow;
    const Rational slack = 1 - F;
    for (int i = 0; i < p.size(); ++i) {
      CHECK(p.share(i) * sol.lambdas[i] == std::min(p.share(i), slack));
      if (p.share(i) < slack) CHECK(sol.lambdas[i] == 1);
      if (sol.lambdas[i] == 1) CHECK(p.share(i) <= slack);
    }
    CHECK(F <= Rational(p.size(), p.size() + 1));
    CHECK(verify_planner_equilibrium<Rational>(p, sol.lambdas, 0).valid);
  }
}

TEST_CASE("share concentration controls which side of 3/4 the flow lands on") {
  std::mt19937_64 rng(31);
  // All shares below 1/4 pushes total bottom flow above 3/4. Weights in
  // [20, 30] with n >= 7 planners guarantee every share <= 1.5/n < 1/4.
  for (int trial = 0; trial < 120; ++trial) {
    int n = 7 + int(rng() % 10);
    std::vector<long long> w(n);
    long long total = 0;
    for (auto& x : w) {
      x = 20 + (long long)(rng() % 11);
      total += x;
    }
    std::vector<Rational> shares;
    for (auto x : w) shares.push_back(Rational(x, total));
    Partition p(shares);
    for (const auto& a : p.shares()) REQUIRE(a < r(1, 4));
    CHECK(solve_planner_equilibrium<Rational>(p).bottom_flow > r(3, 4));
  }
  // A majority share pulls it strictly below 3/4.
  for (int trial = 0; trial < 120; ++trial) {
    int n = 2 + int(rng() % 6);
    std::vector<long long> w(n);
    long long rest = 0;
    for (int i = 1; i < n; ++i) {
      w[i] = 1 + (long long)(rng() % 20);
      rest += w[i];
    }
    w[0] = rest + 1 + (long long)(rng() % 10);
    long long total = rest + w[0];
    std::vector<Rational> shares;
    for (auto x : w) shares.push_back(Rational(x, total));
    auto sol = solve_planner_equilibrium<Rational>(Partition(shares));
    CHECK(sol.bottom_flow < r(3, 4));
  }
  // One or two planners never reach 3/4 at all.
  for (int trial = 0; trial < 120; ++trial) {
    Partition p = random_partition(rng, 2);
    CHECK(solve_planner_equilibrium<Rational>(p).bottom_flow <= r(2, 3));
  }
}

TEST_CASE("best-response iteration oracle converges to the known profiles") {
  auto one = best_response_iteration_oracle<Rational>(Partition({r(1, 1)}), {r(1, 1)});
  CHECK(one.lambdas == std::vector<Rational>{r(1, 2)});
  CHECK(one.bottom_flow == r(1, 2));

  auto four = best_response_iteration_oracle<Rational>(
      equal_partition(4), std::vector<Rational>(4, Rational(0)));
  CHECK(four.lambdas == std::vector<Rational>(4, r(4, 5)));
  CHECK(four.bottom_flow == r(4, 5));

  auto hetero = best_response_iteration_oracle<Rational>(
      Partition({r(1, 10), r(2, 10), r(7, 10)}), std::vector<Rational>(3, Rational(1)));
  CHECK(hetero.lambdas == std::vector<Rational>{r(1, 1), r(1, 1), r(1, 2)});
  CHECK(hetero.bottom_flow == r(13, 20));
}

TEST_CASE("oracle lands on the same flow from arbitrary starts") {
  std::mt19937_64 rng(37);
  Partition p({r(1, 10), r(2, 10), r(7, 10)});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Rational> start;
    for (int i = 0; i < p.size(); ++i) start.push_back(r(rng() % 1001, 1000));
    auto sol = best_response_iteration_oracle<Rational>(p, start);
    CHECK(sol.bottom_flow == r(13, 20));
  }
}

TEST_CASE("solver and oracle agree exactly on random partitions") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 150; ++trial) {
    Partition p = random_partition(rng);
    auto direct = solve_planner_equilibrium<Rational>(p);
    auto iterated = best_response_iteration_oracle<Rational>(
        p, std::vector<Rational>(p.size(), Rational(0)));
    CHECK(direct.lambdas == iterated.lambdas);
    CHECK(direct.bottom_flow == iterated.bottom_flow);
  }
}

TEST_CASE("floating mode tracks the exact solution") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    Partition p = random_partition(rng, 10);
    auto exact = solve_planner_equilibrium<Rational>(p);
    auto approx = solve_planner_equilibrium<double>(p);
    CHECK(std::abs(approx.bottom_flow - to_double(exact.bottom_flow)) < 1e-12);
    for (int i = 0; i < p.size(); ++i) {
      CHECK(std::abs(approx.lambdas[i] - to_double(exact.lambdas[i])) < 1e-12);
    }
    auto iterated = best_response_iteration_oracle<double>(
        p, std::vector<double>(p.size(), 0.0));
    CHECK(std::abs(iterated.bottom_flow - to_double(exact.bottom_flow)) < 1e-9);
  }
}

TEST_CASE("punishment length: minimal N with N(F - 3/4) > 1/2") {
  CHECK(compute_punishment_length(r(4, 5)) == 11);
  CHECK(compute_punishment_length(r(1, 1)) == 3);
  CHECK(compute_punishment_length(r(76, 100)) == 51);
  CHECK_THROWS_AS(compute_punishment_length(r(3, 4)), EngineError);
  CHECK_THROWS_AS(compute_punishment_length(r(1, 2)), EngineError);

  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 200; ++trial) {
    Rational F = r(3, 4) + r(1 + (long long)(rng() % 1000), 4000);
    if (F > 1) F = 1;
    long long n = compute_punishment_length(F);
    CHECK(n == scan_minimal(F - r(3, 4)));
    CHECK(Rational(n) * (F - r(3, 4)) > r(1, 2));
    CHECK_FALSE(Rational(n - 1) * (F - r(3, 4)) > r(1, 2));
  }
}

TEST_CASE("boundary punishment length takes the max of both scans") {
  CHECK(edge_case_punishment_length(r(4, 5), r(3, 4), r(3, 4)) == 11);
  CHECK(edge_case_punishment_length(r(1, 1), r(3, 4), r(3, 4)) == 9);
  CHECK(edge_case_punishment_length(r(76, 100), r(3, 4), r(1, 2)) == 51);
  CHECK_THROWS_AS(edge_case_punishment_length(r(3, 4), r(3, 4), r(1, 2)), EngineError);
  CHECK_THROWS_AS(edge_case_punishment_length(r(4, 5), r(3, 4), r(1, 1)), EngineError);

  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    Rational excess = r(1 + (long long)(rng() % 400), 1600);
    Rational lmax = r(rng() % 1000, 1000);
    long long n = edge_case_punishment_length(r(3, 4) + excess, r(3, 4), lmax);
    CHECK(n == std::max(scan_minimal(excess), scan_minimal((1 - lmax) / 4)));
  }
}
