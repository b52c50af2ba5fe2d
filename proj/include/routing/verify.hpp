#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "routing/game.hpp"
#include "routing/strategies.hpp"

namespace routing {

/// Finite family of deviations searched by the desiderata checks: car
/// templates cover M equal segments of each planner's local share under
/// three policies, planner templates cover constant fractions, one-stage
/// deviations from the scenario strategy, and the myopic responder.
struct DeviationFamily {
  int segments = 20;
  std::vector<int> comply_after = {1, 2, 5};
  std::vector<Rational> planner_fractions = {Rational(0), Rational(1, 4), Rational(1, 2),
                                             Rational(3, 4), Rational(1)};
  bool include_one_shot = true;
  bool include_myopic = true;
};

const std::vector<Rational>& default_discount_grid();  // {1/2, 9/10, 99/100, 999/1000}

/// Discounted cost interval for one run at one discount factor. When a
/// periodic-tail certificate was found the value is exact (lower == upper
/// == the infinite-horizon sum); otherwise the interval brackets it.
struct ComparisonAtDiscount {
  Rational discount;
  Rational deviated_lower, deviated_upper;
  Rational baseline_lower, baseline_upper;
  bool profitable = false;  // deviated certainly below baseline
};

/// One deviation template's evaluation across the discount grid.
struct DeviationOutcome {
  std::string label;
  int planner = 0;
  std::vector<ComparisonAtDiscount> comparisons;  // ascending by discount
  bool violation = false;                         // profitable at the largest discount
};

/// Witness that a stage admits a strict all-planner improvement.
struct CollectiveWitness {
  int planner = 0;
  Rational fraction;                  // the improving alternative
  std::vector<Rational> costs_before;
  std::vector<Rational> costs_after;
};

/// Witness of a profitable car defection (the below-threshold converse).
struct DefectionWitness {
  int planner = 0;
  int segment = 0;  // 1-based segment index
  DefectionScript script;
  Rational deviated_cost;  // truncated discounted subset cost
  Rational baseline_cost;
};

struct VerificationReport {
  std::string desideratum;
  bool violation = false;
  std::vector<DeviationOutcome> outcomes;
  std::optional<Rational> threshold_estimate;  // smallest grid discount that is safe upward
  std::optional<CollectiveWitness> collective_witness;
  bool screened = false;  // stage flow exceeded the one-shot equilibrium flow
  std::optional<long long> recovery_stage;  // first stage after which cost stays optimal
  std::optional<long long> implied_bound;   // recovery bound derived from the scripts
  int horizon = 0;
  std::string summary;
};

/// Looks for the smallest period p <= max_period such that the run's tail
/// provably repeats with period p forever: the last 2p stage records match
/// at distance p (realized flows and emitted fractions; realized
/// assignments and pointers too when include_pointers), every strategy's
/// state either matches exactly at distance p or is a saturating counter
/// that never emptied in the window and did not shrink, and no defection
/// script changes the input pattern after the window (finite scripts must
/// end before it; forever scripts are certifiable only with
/// include_pointers). Returns 0 when no period certifies.
///
/// include_pointers = false is sound only for strategies whose fraction
/// choices ignore the rotation pointer (all shipped strategies except
/// redemption) and runs whose scripts have ended: realized flows are then
/// measure-determined. Use it for planner/total-cost comparisons; subset
/// costs always need include_pointers = true.
int find_periodic_tail(const GameRunner<Rational>& runner, bool include_pointers,
                       int max_period = 48);

/// Discounted sum of a cost series with the given certified period (0 =
/// no certificate; returns the truncation-interval bound with the given
/// per-stage cap).
struct TailedCost {
  Rational lower, upper;
  bool exact = false;
};
TailedCost discount_series(const std::vector<Rational>& costs, const Rational& discount,
                           int period, const Rational& cap);

/// Largest stage cost any flow can produce on the two-route network (used
/// as the tail cap in bound mode).
Rational stage_cost_cap(const Network& network);

/// Desideratum 1: no car-subset defection in the family strictly profits
/// against the scenario profile at the largest grid discount. The
/// prototype runner must be freshly built (never stepped).
VerificationReport check_individual_rationality(const GameRunner<Rational>& prototype,
                                                const DeviationFamily& family,
                                                const std::vector<Rational>& discounts,
                                                int horizon);

/// Desideratum 2: no single planner strictly profits by replacing its
/// strategy with a family template.
VerificationReport check_resilience(const GameRunner<Rational>& prototype,
                                    const DeviationFamily& family,
                                    const std::vector<Rational>& discounts, int horizon);

/// Desideratum 3: after finitely many scripted defections the stage cost
/// returns to the social optimum and stays there through the horizon.
VerificationReport check_optimality(const GameRunner<Rational>& prototype, int horizon,
                                    const Rational& tolerance = Rational(0));

/// Desideratum 4: no planner holds an alternative fraction that strictly
/// lowers every planner's cost at the given stage.
VerificationReport check_no_collective_punishment(const StageRecord<Rational>& record,
                                                  const Partition& partition);

/// Below-threshold converse: enumerates always-bottom defections over M
/// segments per planner and returns the first that strictly beats its
/// baseline truncated discounted subset cost. Requires F + 1/M < 3/4.
std::optional<DefectionWitness> find_profitable_defection(const GameRunner<Rational>& prototype,
                                                          int segments, const Rational& discount,
                                                          int horizon);

}  // namespace routing
