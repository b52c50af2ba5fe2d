#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "routing/assignment.hpp"
#include "routing/equilibrium.hpp"
#include "routing/network.hpp"

namespace routing {

/// Sentinel horizon for scripts that never end.
inline constexpr int kForever = std::numeric_limits<int>::max();

/// A car defection: cars `subset` of one planner's share ignore their
/// recommendations and ride a fixed route while the script is active.
/// Subsets are in the planner's local [0,1) coordinates. A finite
/// [from_stage, to_stage] window expresses "defect for m stages, then
/// comply"; to_stage = kForever never ends.
struct DefectionScript {
  enum class Policy { always_bottom, always_top };

  int planner = 0;
  IntervalSet subset = IntervalSet::empty();
  Policy policy = Policy::always_bottom;
  int from_stage = 1;
  int to_stage = kForever;
  std::string label;

  bool active(int stage) const { return stage >= from_stage && stage <= to_stage; }
};

/// A script resolved at one stage: these cars rode this path.
struct AppliedDefection {
  int planner = 0;
  IntervalSet subset = IntervalSet::empty();
  PathId path = 0;
  std::string label;
};

/// Complete snapshot of a strategy's mutable state, taken after each
/// stage's observation. Two strategies of the same kind with equal traces
/// behave identically on equal future observations; `aux` must therefore
/// carry every state variable not covered by the named fields.
struct StrategyTrace {
  Rational fraction = Rational(0);  // bottom fraction emitted at the last decide
  Rational pointer = Rational(0);   // rotation position after the last decide
  long long counter = 0;            // punishment stages outstanding
  std::vector<Rational> aux;
  bool operator==(const StrategyTrace&) const = default;
};

/// A defection visible to the owning planner when identification is on.
struct IdentifiedDefection {
  IntervalSet subset = IntervalSet::empty();
  PathId path = 0;
};

/// What one planner sees after a stage resolves: realized aggregate edge
/// flows plus its own recommendations (which it already holds). Planners
/// never see each other's recommendations.
struct LocalStageView {
  int stage = 0;
  std::vector<Rational> edge_flows;
  Rational bottom_flow = Rational(0);  // congestible-route flow on two-route nets
  bool identification = false;
  std::vector<IdentifiedDefection> own_defections;
};

/// Stateful per-planner decision rule. decide() produces the stage's
/// assignment over the planner's local [0,1); observe() feeds back the
/// realized stage. clone() must deep-copy all state.
class PlannerStrategy {
 public:
  virtual ~PlannerStrategy() = default;
  virtual StageAssignment decide(int stage) = 0;
  virtual void observe(const LocalStageView& view) = 0;
  virtual std::unique_ptr<PlannerStrategy> clone() const = 0;
  virtual StrategyTrace trace() const = 0;
  virtual std::string kind() const = 0;

  /// True when behavior depends on the counter only through counter > 0,
  /// and the counter evolves by at most -1 per stage plus detection
  /// increments. Lets tail analysis treat a growing counter as periodic.
  virtual bool counter_saturates() const { return false; }
};

template <GameScalar S>
struct StageRecord {
  int stage = 0;
  std::vector<StageAssignment> recommended;  // per planner, local coords
  std::vector<StageAssignment> realized;     // after defection overrides
  std::vector<AppliedDefection> defections;
  std::vector<Rational> edge_flows;
  Rational bottom_flow = Rational(0);
  std::vector<Rational> planner_bottom;      // realized local bottom fraction
  std::vector<S> path_costs;
  S total_cost{};
  std::vector<S> planner_costs;
  std::vector<StrategyTrace> traces;         // post-observe snapshots
};

template <GameScalar S>
using History = std::vector<StageRecord<S>>;

/// Resolves one stage: applies defection overrides to the recommendations,
/// aggregates realized flows (exact rationals), and prices everything.
/// Strategy-free; the traces field is left empty.
template <GameScalar S>
StageRecord<S> run_stage(const Network& network, const Partition& partition,
                         const std::vector<StageAssignment>& recommended,
                         const std::vector<AppliedDefection>& defections);

/// Average realized stage cost of the cars in `subset` (local coordinates
/// of the planner's share). subset of [0,1) with positive measure.
template <GameScalar S>
S subset_cost(const StageRecord<S>& record, int planner, const IntervalSet& subset);

/// Drives strategies and scripts through consecutive stages, recording
/// history. Copying deep-clones the strategies, so a runner can be
/// branched to explore deviations from a shared prefix.
template <GameScalar S>
class GameRunner {
 public:
  GameRunner(Network network, Partition partition,
             std::vector<std::unique_ptr<PlannerStrategy>> strategies,
             std::vector<DefectionScript> scripts, bool identification = false);

  GameRunner(const GameRunner& other);
  GameRunner& operator=(const GameRunner&) = delete;
  GameRunner(GameRunner&&) noexcept = default;

  const StageRecord<S>& step();
  const History<S>& run(int stages);  // runs `stages` more stages

  const History<S>& history() const { return history_; }
  int next_stage() const { return next_stage_; }
  const Network& network() const { return network_; }
  const Partition& partition() const { return partition_; }
  const std::vector<DefectionScript>& scripts() const { return scripts_; }
  bool identification() const { return identification_; }
  const PlannerStrategy& strategy(int i) const { return *strategies_.at(i); }

 private:
  Network network_;
  Partition partition_;
  std::vector<std::unique_ptr<PlannerStrategy>> strategies_;
  std::vector<DefectionScript> scripts_;
  bool identification_;
  bool two_route_;
  PathId bottom_path_ = 0;
  PathId top_path_ = 0;
  History<S> history_;
  int next_stage_ = 1;
};

enum class TailMode { truncated, closed_form, bound };

template <GameScalar S>
struct DiscountedValue {
  S lower{};
  S upper{};
  bool exact() const { return lower == upper; }
};

/// Discounted sum over stages 1..K (costs[k-1] is stage k's cost) with the
/// chosen handling of the unsimulated tail:
///   truncated    sum only;
///   closed_form  sum + c_K * d^{K+1} / (1-d), for sequences constant from
///                some stage on (caller's responsibility);
///   bound        [sum, sum + tail_cap * d^{K+1} / (1-d)].
template <GameScalar S>
DiscountedValue<S> discounted_cost(const std::vector<S>& costs, const S& discount, TailMode mode,
                                   const S& tail_cap = S(1));

/// Discounted sum over stages 1..K plus the exact tail value when the cost
/// sequence continues forever by repeating its last `period` entries.
template <GameScalar S>
S discounted_with_periodic_tail(const std::vector<S>& costs, const S& discount, int period);

}  // namespace routing
