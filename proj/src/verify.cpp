#include "routing/verify.hpp"

#include <algorithm>
#include <memory>
#include <sstream>
#include <utility>

namespace routing {

const std::vector<Rational>& default_discount_grid() {
  static const std::vector<Rational> grid{Rational(1, 2), Rational(9, 10), Rational(99, 100),
                                          Rational(999, 1000)};
  return grid;
}

namespace {

std::string rat_str(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

GameRunner<Rational> run_copy(const GameRunner<Rational>& proto, int horizon) {
  GameRunner<Rational> g = proto;
  g.run(horizon);
  return g;
}

GameRunner<Rational> with_extra_script(const GameRunner<Rational>& proto,
                                       const DefectionScript& extra) {
  std::vector<std::unique_ptr<PlannerStrategy>> strategies;
  for (int i = 0; i < proto.partition().size(); ++i) {
    strategies.push_back(proto.strategy(i).clone());
  }
  auto scripts = proto.scripts();
  scripts.push_back(extra);
  return GameRunner<Rational>(proto.network(), proto.partition(), std::move(strategies),
                              std::move(scripts), proto.identification());
}

GameRunner<Rational> with_replaced_strategy(const GameRunner<Rational>& proto, int planner,
                                            std::unique_ptr<PlannerStrategy> deviation) {
  std::vector<std::unique_ptr<PlannerStrategy>> strategies;
  for (int i = 0; i < proto.partition().size(); ++i) {
    if (i == planner) {
      strategies.push_back(std::move(deviation));
    } else {
      strategies.push_back(proto.strategy(i).clone());
    }
  }
  return GameRunner<Rational>(proto.network(), proto.partition(), std::move(strategies),
                              proto.scripts(), proto.identification());
}

std::vector<Rational> planner_series(const History<Rational>& h, int planner) {
  std::vector<Rational> out;
  out.reserve(h.size());
  for (const auto& rec : h) out.push_back(rec.planner_costs.at(planner));
  return out;
}

std::vector<Rational> subset_series(const History<Rational>& h, int planner,
                                    const IntervalSet& subset) {
  std::vector<Rational> out;
  out.reserve(h.size());
  for (const auto& rec : h) out.push_back(subset_cost<Rational>(rec, planner, subset));
  return out;
}

struct SeriesEval {
  std::vector<Rational> costs;
  int period = 0;
};

std::vector<TailedCost> discount_all(const SeriesEval& eval, const std::vector<Rational>& grid,
                                     const Rational& cap) {
  std::vector<TailedCost> out;
  out.reserve(grid.size());
  for (const auto& d : grid) out.push_back(discount_series(eval.costs, d, eval.period, cap));
  return out;
}

/// True when the deviated value certainly lies strictly below baseline;
/// false when it certainly does not; throws when the intervals overlap.
bool decide_profit(const TailedCost& deviated, const TailedCost& baseline) {
  if (deviated.upper < baseline.lower) return true;
  if (deviated.lower >= baseline.upper) return false;
  throw EngineError("horizon too short for tail stabilization");
}

DeviationOutcome make_outcome(std::string label, int planner,
                              const std::vector<TailedCost>& deviated,
                              const std::vector<TailedCost>& baseline,
                              const std::vector<Rational>& grid) {
  DeviationOutcome out;
  out.label = std::move(label);
  out.planner = planner;
  for (size_t g = 0; g < grid.size(); ++g) {
    bool profit = decide_profit(deviated[g], baseline[g]);
    out.comparisons.push_back({grid[g], deviated[g].lower, deviated[g].upper, baseline[g].lower,
                               baseline[g].upper, profit});
  }
  out.violation = out.comparisons.back().profitable;
  return out;
}

std::vector<Rational> sorted_grid(std::vector<Rational> grid) {
  if (grid.empty()) throw EngineError("discount grid must not be empty");
  for (const auto& d : grid) {
    if (d <= 0 || d >= 1) throw EngineError("discount factor must lie strictly inside (0,1)");
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

void finalize_family_report(VerificationReport& rep, const std::vector<Rational>& grid) {
  for (const auto& o : rep.outcomes) {
    if (o.violation) rep.violation = true;
  }
  if (!rep.violation) {
    for (size_t g = 0; g < grid.size(); ++g) {
      bool safe = true;
      for (const auto& o : rep.outcomes) {
        for (size_t t = g; t < grid.size() && safe; ++t) {
          if (o.comparisons[t].profitable) safe = false;
        }
        if (!safe) break;
      }
      if (safe) {
        rep.threshold_estimate = grid[g];
        break;
      }
    }
  }
  std::ostringstream os;
  if (rep.violation) {
    for (const auto& o : rep.outcomes) {
      if (o.violation) {
        os << "violation: " << o.label << " profits at discount " << rat_str(grid.back());
        break;
      }
    }
  } else {
    os << "pass on family (" << rep.outcomes.size() << " templates)";
    if (rep.threshold_estimate) {
      os << "; no profit at discounts >= " << rat_str(*rep.threshold_estimate);
    }
  }
  rep.summary = os.str();
}

int family_horizon(int horizon) {
  if (horizon < 1) throw EngineError("horizon must be at least one stage");
  return horizon;
}

}  // namespace

int find_periodic_tail(const GameRunner<Rational>& runner, bool include_pointers,
                       int max_period) {
  const auto& h = runner.history();
  const int K = static_cast<int>(h.size());
  if (K == 0) return 0;
  const int n = runner.partition().size();

  if (!include_pointers) {
    for (const auto& script : runner.scripts()) {
      if (script.to_stage == kForever) return 0;
    }
    // Pointer-free certificates assume fraction dynamics that ignore the
    // rotation pointer; the redemption rule's window feeds back into its
    // ledger, so only the pointer-inclusive mode is sound for it.
    for (int i = 0; i < n; ++i) {
      if (dynamic_cast<const RedemptionStrategy*>(&runner.strategy(i)) != nullptr) return 0;
    }
  }

  for (int p = 1; p <= max_period; ++p) {
    if (2 * p > K) break;

    bool scripts_ok = true;
    for (const auto& script : runner.scripts()) {
      if (script.to_stage == kForever) continue;
      if (script.to_stage > K - 2 * p) {
        scripts_ok = false;
        break;
      }
    }
    if (!scripts_ok) continue;

    bool ok = true;
    for (int s = K - 2 * p; s < K - p && ok; ++s) {
      const auto& a = h[s];
      const auto& b = h[s + p];
      if (a.edge_flows != b.edge_flows) {
        ok = false;
        break;
      }
      for (int i = 0; i < n && ok; ++i) {
        if (a.traces[i].fraction != b.traces[i].fraction) ok = false;
        if (ok && include_pointers) {
          if (a.traces[i].pointer != b.traces[i].pointer) ok = false;
          if (ok && !(a.realized[i] == b.realized[i])) ok = false;
        }
      }
    }
    if (!ok) continue;

    for (int i = 0; i < n && ok; ++i) {
      const auto& e = h[K - 1].traces[i];
      const auto& q = h[K - 1 - p].traces[i];
      bool fields_equal = e.fraction == q.fraction && e.aux == q.aux &&
                          (!include_pointers || e.pointer == q.pointer);
      if (fields_equal && e.counter == q.counter) continue;  // state recurs exactly
      // Saturating-counter certificate: behavior depends on the counter
      // only through counter > 0, the counter never emptied inside the
      // window, and it did not shrink over one period.
      if (!fields_equal || !runner.strategy(i).counter_saturates() || e.counter < q.counter) {
        ok = false;
        break;
      }
      for (int s = K - 2 * p; s < K; ++s) {
        if (h[s].traces[i].counter < 1) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return p;
  }
  return 0;
}

TailedCost discount_series(const std::vector<Rational>& costs, const Rational& discount,
                           int period, const Rational& cap) {
  if (period > 0) {
    Rational v = discounted_with_periodic_tail<Rational>(costs, discount, period);
    return {v, v, true};
  }
  auto b = discounted_cost<Rational>(costs, discount, TailMode::bound, cap);
  return {b.lower, b.upper, false};
}

Rational stage_cost_cap(const Network& network) {
  PigouPaths paths = pigou_paths(network);
  Flow all_bottom;
  all_bottom.path_weights.assign(static_cast<size_t>(network.path_count()), Rational(0));
  all_bottom.path_weights[static_cast<size_t>(paths.bottom)] = 1;
  auto costs = path_costs<Rational>(network, all_bottom);
  return std::max(costs[static_cast<size_t>(paths.top)],
                  costs[static_cast<size_t>(paths.bottom)]);
}

VerificationReport check_individual_rationality(const GameRunner<Rational>& prototype,
                                                const DeviationFamily& family,
                                                const std::vector<Rational>& discounts,
                                                int horizon) {
  const int K = family_horizon(horizon);
  if (family.segments < 1) throw EngineError("segment count must be at least 1");
  const auto grid = sorted_grid(discounts);
  const Rational cap = stage_cost_cap(prototype.network());
  const int n = prototype.partition().size();
  const int M = family.segments;

  VerificationReport rep;
  rep.desideratum = "individual_rationality";
  rep.horizon = K;

  GameRunner<Rational> baseline = run_copy(prototype, K);
  const int base_period = find_periodic_tail(baseline, /*include_pointers=*/true);

  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= M; ++j) {
      IntervalSet segment = IntervalSet::interval(Rational(j - 1, M), Rational(j, M));
      SeriesEval base{subset_series(baseline.history(), i, segment), base_period};
      auto base_values = discount_all(base, grid, cap);

      std::string prefix = "planner " + std::to_string(i) + " cars [" +
                           rat_str(Rational(j - 1, M)) + "," + rat_str(Rational(j, M)) + ") ";

      auto evaluate = [&](const DefectionScript& script, const std::string& label) {
        GameRunner<Rational> dev = with_extra_script(prototype, script);
        dev.run(K);
        SeriesEval de{subset_series(dev.history(), i, segment),
                      find_periodic_tail(dev, /*include_pointers=*/true)};
        rep.outcomes.push_back(
            make_outcome(label, i, discount_all(de, grid, cap), base_values, grid));
      };

      evaluate({i, segment, DefectionScript::Policy::always_bottom, 1, kForever, "always-bottom"},
               prefix + "always-bottom");
      evaluate({i, segment, DefectionScript::Policy::always_top, 1, kForever, "always-top"},
               prefix + "always-top");
      for (int m : family.comply_after) {
        if (m < 1) throw EngineError("comply-after durations must be at least 1");
        evaluate({i, segment, DefectionScript::Policy::always_bottom, 1, m, "bottom-burst"},
                 prefix + "bottom-for-" + std::to_string(m));
      }
    }
  }

  finalize_family_report(rep, grid);
  return rep;
}

VerificationReport check_resilience(const GameRunner<Rational>& prototype,
                                    const DeviationFamily& family,
                                    const std::vector<Rational>& discounts, int horizon) {
  const int K = family_horizon(horizon);
  const auto grid = sorted_grid(discounts);
  const PigouPaths paths = pigou_paths(prototype.network());
  const Rational cap = stage_cost_cap(prototype.network());
  const int n = prototype.partition().size();

  VerificationReport rep;
  rep.desideratum = "resilience";
  rep.horizon = K;

  GameRunner<Rational> baseline = run_copy(prototype, K);
  const int base_period = find_periodic_tail(baseline, /*include_pointers=*/false);

  for (int i = 0; i < n; ++i) {
    SeriesEval base{planner_series(baseline.history(), i), base_period};
    auto base_values = discount_all(base, grid, cap);

    auto evaluate = [&](std::unique_ptr<PlannerStrategy> strategy, const std::string& label) {
      GameRunner<Rational> dev = with_replaced_strategy(prototype, i, std::move(strategy));
      dev.run(K);
      SeriesEval de{planner_series(dev.history(), i),
                    find_periodic_tail(dev, /*include_pointers=*/false)};
      rep.outcomes.push_back(
          make_outcome(label, i, discount_all(de, grid, cap), base_values, grid));
    };

    std::string prefix = "planner " + std::to_string(i) + " ";
    for (const auto& fraction : family.planner_fractions) {
      evaluate(std::make_unique<StaticStrategy>(fraction, paths),
               prefix + "constant " + rat_str(fraction));
    }
    if (family.include_one_shot) {
      for (const auto& fraction : family.planner_fractions) {
        evaluate(std::make_unique<OneShotDeviationStrategy>(prototype.strategy(i).clone(), 1,
                                                            fraction, paths),
                 prefix + "one-shot " + rat_str(fraction));
      }
    }
    if (family.include_myopic) {
      evaluate(std::make_unique<MyopicStrategy>(prototype.partition().share(i), paths),
               prefix + "myopic");
    }
  }

  finalize_family_report(rep, grid);
  return rep;
}

VerificationReport check_optimality(const GameRunner<Rational>& prototype, int horizon,
                                    const Rational& tolerance) {
  const int K = family_horizon(horizon);
  if (tolerance < 0) throw EngineError("tolerance must be nonnegative");

  long long last_to = 0;
  for (const auto& script : prototype.scripts()) {
    if (script.to_stage == kForever || script.to_stage >= K) {
      throw EngineError("defection scripts must end before the horizon");
    }
    last_to = std::max<long long>(last_to, script.to_stage);
  }
  long long scripted_stages = 0;
  for (long long k = 1; k <= last_to; ++k) {
    for (const auto& script : prototype.scripts()) {
      if (script.active(static_cast<int>(k))) {
        ++scripted_stages;
        break;
      }
    }
  }

  const int n = prototype.partition().size();
  std::optional<long long> implied;
  {
    long long worst = 0;
    bool computable = true;
    for (int i = 0; i < n; ++i) {
      const auto* pun = dynamic_cast<const PunishmentStrategy*>(&prototype.strategy(i));
      if (pun == nullptr) {
        computable = false;
        break;
      }
      worst = std::max(worst, pun->punishment_length());
    }
    if (computable) implied = last_to + scripted_stages * (worst + 1);
  }

  GameRunner<Rational> run = run_copy(prototype, K);
  const Rational optimum = optimal_flow<Rational>(prototype.network()).cost;

  long long recovery = 0;
  for (int k = K; k >= 1; --k) {
    const Rational& c = run.history()[k - 1].total_cost;
    Rational gap = c >= optimum ? Rational(c - optimum) : Rational(optimum - c);
    if (gap > tolerance) {
      recovery = k;
      break;
    }
  }
  bool settled = true;
  for (const auto& trace : run.history().back().traces) {
    if (trace.counter != 0) settled = false;
  }

  VerificationReport rep;
  rep.desideratum = "optimality";
  rep.horizon = K;
  rep.recovery_stage = recovery;
  rep.implied_bound = implied;
  rep.violation = recovery >= K || !settled || (implied && recovery > *implied);

  std::ostringstream os;
  if (recovery >= K) {
    os << "stage cost still " << rat_str(run.history().back().total_cost) << " != optimum "
       << rat_str(optimum) << " at the horizon";
  } else if (!settled) {
    os << "punishment counters still positive at the horizon";
  } else {
    os << "stage cost equals the optimum " << rat_str(optimum) << " from stage "
       << (recovery + 1) << " on";
    if (implied) os << " (scripted bound: stage " << (*implied + 1) << ")";
  }
  rep.summary = os.str();
  return rep;
}

VerificationReport check_no_collective_punishment(const StageRecord<Rational>& record,
                                                  const Partition& partition) {
  const int n = partition.size();
  if (static_cast<int>(record.planner_bottom.size()) != n ||
      static_cast<int>(record.planner_costs.size()) != n) {
    throw EngineError("stage record does not match the partition");
  }
  const Rational f = record.bottom_flow;
  // The closed-form repricing below assumes the unit two-route network:
  // priced route costs its own flow, fixed route costs 1.
  for (int i = 0; i < n; ++i) {
    Rational li = record.planner_bottom[i];
    Rational expected = li * f + (1 - li);
    if (expected != record.planner_costs[i]) {
      throw EngineError("collective-punishment check requires the unit two-route stage");
    }
  }

  VerificationReport rep;
  rep.desideratum = "no_collective_punishment";
  rep.horizon = 1;
  rep.screened = false;
  {
    auto eq = solve_planner_equilibrium<Rational>(partition);
    rep.screened = f > eq.bottom_flow;
  }

  auto pareto_improves = [&](int i, const Rational& alt, std::vector<Rational>& costs_after) {
    const Rational share = partition.share(i);
    const Rational li = record.planner_bottom[i];
    Rational f_alt = f + share * (alt - li);
    costs_after.clear();
    for (int j = 0; j < n; ++j) {
      Rational lj = j == i ? alt : record.planner_bottom[j];
      Rational cost = lj * f_alt + (1 - lj);
      if (!(cost < record.planner_costs[j])) return false;
      costs_after.push_back(cost);
    }
    return true;
  };

  for (int i = 0; i < n && !rep.collective_witness; ++i) {
    std::vector<Rational> candidates;
    candidates.reserve(1002);
    for (int t = 0; t <= 1000; ++t) candidates.push_back(Rational(t, 1000));
    {
      // Vertex of planner i's stage-cost parabola in its own fraction.
      const Rational share = partition.share(i);
      Rational vertex = (1 - (f - share * record.planner_bottom[i])) / (2 * share);
      if (vertex < 0) vertex = 0;
      if (vertex > 1) vertex = 1;
      candidates.push_back(vertex);
    }
    std::vector<Rational> costs_after;
    for (const auto& alt : candidates) {
      if (pareto_improves(i, alt, costs_after)) {
        CollectiveWitness w;
        w.planner = i;
        w.fraction = alt;
        w.costs_before = record.planner_costs;
        w.costs_after = costs_after;
        rep.collective_witness = std::move(w);
        rep.violation = true;
        break;
      }
    }
  }

  std::ostringstream os;
  if (rep.violation) {
    os << "violation: planner " << rep.collective_witness->planner << " moving to fraction "
       << rat_str(rep.collective_witness->fraction) << " strictly lowers every planner's cost";
  } else {
    os << "pass: no alternative fraction strictly improves all planners";
    if (rep.screened) os << " (flow exceeds the one-shot equilibrium flow)";
  }
  rep.summary = os.str();
  return rep;
}

std::optional<DefectionWitness> find_profitable_defection(const GameRunner<Rational>& prototype,
                                                          int segments, const Rational& discount,
                                                          int horizon) {
  const int K = family_horizon(horizon);
  if (segments < 1) throw EngineError("segment count must be at least 1");
  if (discount <= 0 || discount >= 1) {
    throw EngineError("discount factor must lie strictly inside (0,1)");
  }
  const Rational F = solve_planner_equilibrium<Rational>(prototype.partition()).bottom_flow;
  if (!(F + Rational(1, segments) < Rational(3, 4))) {
    throw EngineError("segment count too small");
  }

  GameRunner<Rational> baseline = run_copy(prototype, K);
  const int n = prototype.partition().size();

  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= segments; ++j) {
      IntervalSet segment =
          IntervalSet::interval(Rational(j - 1, segments), Rational(j, segments));
      DefectionScript script{i, segment, DefectionScript::Policy::always_bottom, 1, kForever,
                             "segment " + std::to_string(j)};
      GameRunner<Rational> dev = with_extra_script(prototype, script);
      dev.run(K);

      Rational dev_cost =
          discounted_cost<Rational>(subset_series(dev.history(), i, segment), discount,
                                    TailMode::truncated)
              .lower;
      Rational base_cost =
          discounted_cost<Rational>(subset_series(baseline.history(), i, segment), discount,
                                    TailMode::truncated)
              .lower;
      if (dev_cost < base_cost) {
        return DefectionWitness{i, j, script, dev_cost, base_cost};
      }
    }
  }
  return std::nullopt;
}

}  // namespace routing
