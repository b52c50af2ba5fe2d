#include "routing/game.hpp"

#include <optional>
#include <utility>

namespace routing {

namespace {

std::optional<PigouPaths> try_two_route(const Network& network) {
  try {
    return pigou_paths(network);
  } catch (const EngineError&) {
    return std::nullopt;
  }
}

}  // namespace

template <GameScalar S>
StageRecord<S> run_stage(const Network& network, const Partition& partition,
                         const std::vector<StageAssignment>& recommended,
                         const std::vector<AppliedDefection>& defections) {
  const int n = partition.size();
  const int paths = network.path_count();
  if (static_cast<int>(recommended.size()) != n) {
    throw EngineError("one assignment per planner required");
  }
  for (const auto& assignment : recommended) {
    for (const auto& piece : assignment.pieces()) {
      if (piece.path >= paths) throw EngineError("assignment references unknown path");
    }
  }

  StageRecord<S> record;
  record.recommended = recommended;
  record.realized = recommended;
  record.defections = defections;

  std::vector<IntervalSet> claimed(n, IntervalSet::empty());
  for (const auto& d : defections) {
    if (d.planner < 0 || d.planner >= n) throw EngineError("defection references unknown planner");
    if (d.path < 0 || d.path >= paths) throw EngineError("defection references unknown path");
    if (d.subset.is_empty()) throw EngineError("defection subset must have positive measure");
    if (!claimed[d.planner].disjoint_from(d.subset)) throw EngineError("conflicting defections");
    claimed[d.planner] = claimed[d.planner].unite(d.subset);
    record.realized[d.planner] =
        record.realized[d.planner].override_subset(d.subset, {{d.subset, d.path}});
  }

  Flow global;
  global.path_weights.assign(paths, Rational(0));
  for (int i = 0; i < n; ++i) {
    for (const auto& piece : record.realized[i].pieces()) {
      global.path_weights[piece.path] += partition.share(i) * piece.cars.measure();
    }
  }

  record.edge_flows = edge_flow(network, global);
  record.path_costs = path_costs<S>(network, global);
  record.total_cost = total_cost<S>(network, global);

  record.planner_costs.reserve(n);
  S weighted(0);
  for (int i = 0; i < n; ++i) {
    S cost(0);
    for (const auto& piece : record.realized[i].pieces()) {
      cost = cost + ScalarTraits<S>::from(piece.cars.measure()) * record.path_costs[piece.path];
    }
    weighted = weighted + ScalarTraits<S>::from(partition.share(i)) * cost;
    record.planner_costs.push_back(std::move(cost));
  }
  if (!ScalarTraits<S>::eq(weighted, record.total_cost)) {
    throw EngineError("stage cost identity violated");
  }

  if (auto roles = try_two_route(network)) {
    record.bottom_flow = global.path_weights[roles->bottom];
    for (int i = 0; i < n; ++i) {
      record.planner_bottom.push_back(record.realized[i].path_measure(roles->bottom));
    }
  } else {
    record.planner_bottom.assign(n, Rational(0));
  }
  return record;
}

template <GameScalar S>
S subset_cost(const StageRecord<S>& record, int planner, const IntervalSet& subset) {
  if (planner < 0 || planner >= static_cast<int>(record.realized.size())) {
    throw EngineError("subset cost references unknown planner");
  }
  const Rational size = subset.measure();
  if (size == 0) throw EngineError("subset cost requires positive measure");
  S acc(0);
  for (const auto& piece : record.realized[planner].pieces()) {
    Rational overlap = piece.cars.intersect(subset).measure();
    if (overlap == 0) continue;
    acc = acc + ScalarTraits<S>::from(overlap / size) * record.path_costs[piece.path];
  }
  return acc;
}

template <GameScalar S>
GameRunner<S>::GameRunner(Network network, Partition partition,
                          std::vector<std::unique_ptr<PlannerStrategy>> strategies,
                          std::vector<DefectionScript> scripts, bool identification)
    : network_(std::move(network)),
      partition_(std::move(partition)),
      strategies_(std::move(strategies)),
      scripts_(std::move(scripts)),
      identification_(identification) {
  if (static_cast<int>(strategies_.size()) != partition_.size()) {
    throw EngineError("one strategy per planner required");
  }
  for (const auto& s : strategies_) {
    if (!s) throw EngineError("strategy must not be null");
  }
  auto roles = try_two_route(network_);
  two_route_ = roles.has_value();
  if (two_route_) {
    bottom_path_ = roles->bottom;
    top_path_ = roles->top;
  }
  for (const auto& script : scripts_) {
    if (script.planner < 0 || script.planner >= partition_.size()) {
      throw EngineError("defection script references unknown planner");
    }
    if (script.subset.is_empty()) {
      throw EngineError("defection subset must have positive measure");
    }
    if (script.from_stage < 1 || script.to_stage < script.from_stage) {
      throw EngineError("defection script stage range is invalid");
    }
    if (!two_route_) {
      throw EngineError("defection scripts require a two-route network");
    }
  }
}

template <GameScalar S>
GameRunner<S>::GameRunner(const GameRunner& other)
    : network_(other.network_),
      partition_(other.partition_),
      scripts_(other.scripts_),
      identification_(other.identification_),
      two_route_(other.two_route_),
      bottom_path_(other.bottom_path_),
      top_path_(other.top_path_),
      history_(other.history_),
      next_stage_(other.next_stage_) {
  strategies_.reserve(other.strategies_.size());
  for (const auto& s : other.strategies_) strategies_.push_back(s->clone());
}

template <GameScalar S>
const StageRecord<S>& GameRunner<S>::step() {
  const int k = next_stage_;
  const int n = partition_.size();
  std::vector<StageAssignment> recommended;
  recommended.reserve(n);
  for (int i = 0; i < n; ++i) {
    try {
      recommended.push_back(strategies_[i]->decide(k));
    } catch (const EngineError& e) {
      throw EngineError("planner " + std::to_string(i) + " strategy failed at stage " +
                        std::to_string(k) + ": " + e.what());
    }
  }

  std::vector<AppliedDefection> applied;
  for (const auto& script : scripts_) {
    if (!script.active(k)) continue;
    PathId path =
        script.policy == DefectionScript::Policy::always_bottom ? bottom_path_ : top_path_;
    applied.push_back({script.planner, script.subset, path, script.label});
  }

  StageRecord<S> record;
  try {
    record = run_stage<S>(network_, partition_, recommended, applied);
  } catch (const EngineError& e) {
    throw EngineError("stage " + std::to_string(k) + ": " + e.what());
  }
  record.stage = k;

  for (int i = 0; i < n; ++i) {
    LocalStageView view;
    view.stage = k;
    view.edge_flows = record.edge_flows;
    view.bottom_flow = record.bottom_flow;
    view.identification = identification_;
    if (identification_) {
      for (const auto& d : applied) {
        if (d.planner == i) view.own_defections.push_back({d.subset, d.path});
      }
    }
    try {
      strategies_[i]->observe(view);
    } catch (const EngineError& e) {
      throw EngineError("planner " + std::to_string(i) + " strategy failed at stage " +
                        std::to_string(k) + ": " + e.what());
    }
    record.traces.push_back(strategies_[i]->trace());
  }

  history_.push_back(std::move(record));
  ++next_stage_;
  return history_.back();
}

template <GameScalar S>
const History<S>& GameRunner<S>::run(int stages) {
  if (stages < 0) throw EngineError("stage count must be nonnegative");
  for (int i = 0; i < stages; ++i) step();
  return history_;
}

namespace {

template <GameScalar S>
void check_discount(const S& discount) {
  if (!(discount > S(0)) || !(discount < S(1))) {
    throw EngineError("discount factor must lie strictly inside (0,1)");
  }
}

}  // namespace

template <GameScalar S>
DiscountedValue<S> discounted_cost(const std::vector<S>& costs, const S& discount, TailMode mode,
                                   const S& tail_cap) {
  check_discount(discount);
  S sum(0);
  S power(1);
  for (const auto& c : costs) {
    power = power * discount;
    sum = sum + power * c;
  }
  DiscountedValue<S> out{sum, sum};
  if (mode == TailMode::truncated) return out;
  S tail_unit = power * discount / (S(1) - discount);
  if (mode == TailMode::closed_form) {
    if (costs.empty()) throw EngineError("closed-form tail requires at least one stage");
    out.lower = out.upper = sum + costs.back() * tail_unit;
  } else {
    out.upper = sum + tail_cap * tail_unit;
  }
  return out;
}

template <GameScalar S>
S discounted_with_periodic_tail(const std::vector<S>& costs, const S& discount, int period) {
  check_discount(discount);
  const int k = static_cast<int>(costs.size());
  if (period < 1 || period > k) {
    throw EngineError("tail period must lie between 1 and the stage count");
  }
  S sum(0);
  S power(1);
  for (const auto& c : costs) {
    power = power * discount;
    sum = sum + power * c;
  }
  S cycle(1);
  for (int r = 0; r < period; ++r) cycle = cycle * discount;
  S tail(0);
  S pw = power;  // discount^k
  for (int r = 1; r <= period; ++r) {
    pw = pw * discount;
    tail = tail + pw * costs[k - period + r - 1];
  }
  return sum + tail / (S(1) - cycle);
}

template StageRecord<Rational> run_stage<Rational>(const Network&, const Partition&,
                                                   const std::vector<StageAssignment>&,
                                                   const std::vector<AppliedDefection>&);
template StageRecord<double> run_stage<double>(const Network&, const Partition&,
                                               const std::vector<StageAssignment>&,
                                               const std::vector<AppliedDefection>&);
template Rational subset_cost<Rational>(const StageRecord<Rational>&, int, const IntervalSet&);
template double subset_cost<double>(const StageRecord<double>&, int, const IntervalSet&);
template class GameRunner<Rational>;
template class GameRunner<double>;
template DiscountedValue<Rational> discounted_cost<Rational>(const std::vector<Rational>&,
                                                             const Rational&, TailMode,
                                                             const Rational&);
template DiscountedValue<double> discounted_cost<double>(const std::vector<double>&, const double&,
                                                         TailMode, const double&);
template Rational discounted_with_periodic_tail<Rational>(const std::vector<Rational>&,
                                                          const Rational&, int);
template double discounted_with_periodic_tail<double>(const std::vector<double>&, const double&,
                                                      int);

}  // namespace routing
