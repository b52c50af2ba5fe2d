#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "routing/game.hpp"

namespace routing {

/// Declarative description of one edge for scenario files.
struct EdgeSpec {
  std::string tail;
  std::string head;
  CostFunction cost = CostFunction::constant(Rational(0));
  bool operator==(const EdgeSpec&) const = default;
};

/// Either the canonical two-route instance or an explicit edge list.
struct NetworkSpec {
  bool pigou = true;
  std::vector<std::string> nodes;
  std::vector<EdgeSpec> edges;
  std::string source;
  std::string sink;
  bool operator==(const NetworkSpec&) const = default;
};

/// One planner's strategy. `kind` selects the rule; the optional fields
/// feed that rule's constructor and must not be set for other kinds.
struct StrategySpec {
  std::string kind;                    // static | punishment | edge_case |
                                       // myopic | redemption | one_shot
  std::optional<Rational> fraction;    // static, one_shot
  std::optional<long long> length;     // punishment override
  std::optional<Rational> detect_eps;  // punishment, edge_case
  std::optional<Rational> initial;     // myopic
  std::optional<Rational> delta;       // redemption
  std::optional<int> stage;            // one_shot
  std::vector<StrategySpec> inner;     // one_shot: exactly one element
  bool operator==(const StrategySpec&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  NetworkSpec network;
  std::vector<Rational> shares;
  std::vector<StrategySpec> strategies;
  std::vector<DefectionScript> scripts;
  int horizon = 120;
  std::vector<Rational> discounts;  // parse fills the default grid if absent
  NumberMode mode = NumberMode::rational;
  unsigned long long seed = 0;
  bool identification = false;
  int segments = 20;
};

/// Parses a scenario from JSON text. Unknown keys, malformed rationals,
/// and cross-field inconsistencies throw EngineError with a diagnostic
/// naming the offending location.
Scenario parse_scenario(const std::string& text);

/// Reads and parses a scenario file.
Scenario load_scenario(const std::string& path);

/// Canonical serialization: sorted keys, two-space indent, rationals as
/// "p/q" strings. parse(dump(s)) reproduces s, and dump is a fixed point
/// on parsed scenarios, so configs can be round-tripped byte-identically.
std::string dump_scenario(const Scenario& scenario);

/// FNV-1a hash of the canonical serialization, as 16 hex digits. Embedded
/// in every output file header for reproducibility.
std::string config_hash(const Scenario& scenario);

Network build_network(const NetworkSpec& spec);

std::unique_ptr<PlannerStrategy> build_strategy(const StrategySpec& spec,
                                                const Partition& partition, int self,
                                                PigouPaths paths);

/// Materializes the scenario into a ready-to-run game.
template <GameScalar S>
GameRunner<S> build_runner(const Scenario& scenario);

}  // namespace routing
