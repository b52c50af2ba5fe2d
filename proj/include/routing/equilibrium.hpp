#pragma once

#include <optional>
#include <vector>

#include "routing/scalar.hpp"

namespace routing {

/// Division of the unit of traffic among planners. Shares are positive
/// exact rationals summing to exactly 1, in caller order.
class Partition {
 public:
  explicit Partition(std::vector<Rational> shares);
  const std::vector<Rational>& shares() const { return shares_; }
  int size() const { return static_cast<int>(shares_.size()); }
  const Rational& share(int i) const { return shares_.at(i); }

 private:
  std::vector<Rational> shares_;
};

template <GameScalar S>
struct EquilibriumSolution {
  std::vector<S> lambdas;  // per planner, caller order
  S bottom_flow;           // F = sum of alpha_i * lambda_i
};

/// One-shot cost of planner i on the two-route instance when each planner j
/// sends fraction lambda_j of its share down the congestible route:
///   c_i = (1 - l_i) + l_i * (a_i l_i + sum_{j != i} a_j l_j).
/// Evaluated through two independent algebraic forms that must agree.
template <GameScalar S>
S one_shot_planner_cost(const Partition& partition, const std::vector<S>& lambdas, int i);

/// Planner i's unique cost-minimizing fraction against the others' fixed
/// fractions: the parabola vertex (1 - F_i) / (2 a_i) clamped to [0, 1].
/// A vertex exactly at 1 yields 1.
template <GameScalar S>
S best_response(const Partition& partition, const std::vector<S>& lambdas, int i);

/// Direct equilibrium solver. Sorts shares ascending and scans for the
/// split point k where the remaining planners are interior; the smallest
/// shares saturate at 1. Runs in O(n log n); unique result.
template <GameScalar S>
EquilibriumSolution<S> solve_planner_equilibrium(const Partition& partition);

template <GameScalar S>
struct EquilibriumCheck {
  bool valid = false;
  // Populated on failure: a planner with a strictly improving response.
  int planner = -1;
  S better_lambda{};
  S cost_drop{};
};

/// Confirms every fraction is its own best response (within tol; exact
/// mode passes tol 0). On failure returns the first improving deviation.
template <GameScalar S>
EquilibriumCheck<S> verify_planner_equilibrium(const Partition& partition,
                                               const std::vector<S>& lambdas,
                                               const S& tol);

/// Independent fixed-point oracle: round-robin best-response sweeps from
/// `start`. Terminates when a sweep's profile verifies as an equilibrium,
/// or when the clamped-at-1 set repeats across sweeps and the limit profile
/// of that clamp pattern (interior planners share a_i l_i = 1 - F) passes
/// the per-planner best-response check. Never consults the direct solver.
/// Errors with the last iterate after max_iters sweeps.
template <GameScalar S>
EquilibriumSolution<S> best_response_iteration_oracle(const Partition& partition,
                                                      std::vector<S> start,
                                                      int max_iters = 10000);

/// Minimal integer N with N * (F - 3/4) > 1/2. Errors unless F > 3/4.
long long compute_punishment_length(const Rational& F);

/// Boundary calibration when the equilibrium flow sits exactly at 3/4:
/// minimal N satisfying both N * (observed - prescribed) > 1/2 and
/// N * (1 - lambda_max) / 4 > 1/2. Requires observed > prescribed and
/// lambda_max < 1.
long long edge_case_punishment_length(const Rational& observed, const Rational& prescribed,
                                      const Rational& lambda_max);

}  // namespace routing
