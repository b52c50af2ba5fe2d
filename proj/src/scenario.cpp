#include "routing/scenario.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "routing/equilibrium.hpp"
#include "routing/strategies.hpp"

namespace routing {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw EngineError("config error at " + where + ": " + what);
}

Rational get_rational(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a rational as a \"p/q\" string");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const EngineError& e) {
    fail(where, e.what());
  }
}

long long get_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected a boolean");
  return j.get<bool>();
}

const json& get_array(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  return j;
}

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const auto& key : allowed) {
      if (item.key() == key) known = true;
    }
    if (!known) fail(where, "unknown key \"" + item.key() + "\"");
  }
}

CostFunction parse_cost(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a cost object");
  std::string kind = j.contains("kind") ? get_string(j.at("kind"), where + ".kind") : "";
  if (kind == "constant") {
    reject_unknown_keys(j, {"kind", "b"}, where);
    if (!j.contains("b")) fail(where, "constant cost needs \"b\"");
    return CostFunction::constant(get_rational(j.at("b"), where + ".b"));
  }
  if (kind == "affine") {
    reject_unknown_keys(j, {"kind", "a", "b"}, where);
    if (!j.contains("a") || !j.contains("b")) fail(where, "affine cost needs \"a\" and \"b\"");
    return CostFunction::affine(get_rational(j.at("a"), where + ".a"),
                                get_rational(j.at("b"), where + ".b"));
  }
  if (kind == "monomial") {
    reject_unknown_keys(j, {"kind", "a", "b", "exponent"}, where);
    if (!j.contains("a") || !j.contains("b") || !j.contains("exponent")) {
      fail(where, "monomial cost needs \"a\", \"b\", and \"exponent\"");
    }
    long long exponent = get_integer(j.at("exponent"), where + ".exponent");
    if (exponent < 1) fail(where + ".exponent", "exponent must be at least 1");
    return CostFunction::monomial(get_rational(j.at("a"), where + ".a"),
                                  static_cast<unsigned>(exponent),
                                  get_rational(j.at("b"), where + ".b"));
  }
  fail(where + ".kind", "expected \"constant\", \"affine\", or \"monomial\"");
}

json cost_to_json(const CostFunction& cost) {
  json j;
  switch (cost.kind()) {
    case CostFunction::Kind::constant:
      j["kind"] = "constant";
      j["b"] = format_rational(cost.b());
      break;
    case CostFunction::Kind::affine:
      j["kind"] = "affine";
      j["a"] = format_rational(cost.a());
      j["b"] = format_rational(cost.b());
      break;
    case CostFunction::Kind::monomial:
      j["kind"] = "monomial";
      j["a"] = format_rational(cost.a());
      j["b"] = format_rational(cost.b());
      j["exponent"] = static_cast<long long>(cost.exponent());
      break;
  }
  return j;
}

NetworkSpec parse_network(const json& j, const std::string& where) {
  NetworkSpec spec;
  if (j.is_string()) {
    if (j.get<std::string>() != "pigou") fail(where, "the only named network is \"pigou\"");
    return spec;
  }
  if (!j.is_object()) fail(where, "expected \"pigou\" or a network object");
  reject_unknown_keys(j, {"nodes", "edges", "source", "sink"}, where);
  for (const char* key : {"nodes", "edges", "source", "sink"}) {
    if (!j.contains(key)) fail(where, std::string("missing \"") + key + "\"");
  }
  spec.pigou = false;
  for (const auto& node : get_array(j.at("nodes"), where + ".nodes")) {
    spec.nodes.push_back(get_string(node, where + ".nodes[]"));
  }
  int index = 0;
  for (const auto& edge : get_array(j.at("edges"), where + ".edges")) {
    std::string ewhere = where + ".edges[" + std::to_string(index++) + "]";
    if (!edge.is_object()) fail(ewhere, "expected an edge object");
    reject_unknown_keys(edge, {"tail", "head", "cost"}, ewhere);
    for (const char* key : {"tail", "head", "cost"}) {
      if (!edge.contains(key)) fail(ewhere, std::string("missing \"") + key + "\"");
    }
    EdgeSpec e;
    e.tail = get_string(edge.at("tail"), ewhere + ".tail");
    e.head = get_string(edge.at("head"), ewhere + ".head");
    e.cost = parse_cost(edge.at("cost"), ewhere + ".cost");
    spec.edges.push_back(std::move(e));
  }
  spec.source = get_string(j.at("source"), where + ".source");
  spec.sink = get_string(j.at("sink"), where + ".sink");
  return spec;
}

json network_to_json(const NetworkSpec& spec) {
  if (spec.pigou) return json("pigou");
  json j;
  j["nodes"] = spec.nodes;
  json edges = json::array();
  for (const auto& edge : spec.edges) {
    json e;
    e["tail"] = edge.tail;
    e["head"] = edge.head;
    e["cost"] = cost_to_json(edge.cost);
    edges.push_back(std::move(e));
  }
  j["edges"] = std::move(edges);
  j["source"] = spec.source;
  j["sink"] = spec.sink;
  return j;
}

StrategySpec parse_strategy(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a strategy object");
  reject_unknown_keys(
      j, {"kind", "fraction", "length", "detect_eps", "initial", "delta", "stage", "inner"},
      where);
  if (!j.contains("kind")) fail(where, "missing \"kind\"");
  StrategySpec spec;
  spec.kind = get_string(j.at("kind"), where + ".kind");
  if (j.contains("fraction")) spec.fraction = get_rational(j.at("fraction"), where + ".fraction");
  if (j.contains("length")) spec.length = get_integer(j.at("length"), where + ".length");
  if (j.contains("detect_eps")) {
    spec.detect_eps = get_rational(j.at("detect_eps"), where + ".detect_eps");
  }
  if (j.contains("initial")) spec.initial = get_rational(j.at("initial"), where + ".initial");
  if (j.contains("delta")) spec.delta = get_rational(j.at("delta"), where + ".delta");
  if (j.contains("stage")) {
    spec.stage = static_cast<int>(get_integer(j.at("stage"), where + ".stage"));
  }
  if (j.contains("inner")) {
    spec.inner.push_back(parse_strategy(j.at("inner"), where + ".inner"));
  }
  return spec;
}

json strategy_to_json(const StrategySpec& spec) {
  json j;
  j["kind"] = spec.kind;
  if (spec.fraction) j["fraction"] = format_rational(*spec.fraction);
  if (spec.length) j["length"] = *spec.length;
  if (spec.detect_eps) j["detect_eps"] = format_rational(*spec.detect_eps);
  if (spec.initial) j["initial"] = format_rational(*spec.initial);
  if (spec.delta) j["delta"] = format_rational(*spec.delta);
  if (spec.stage) j["stage"] = *spec.stage;
  if (!spec.inner.empty()) j["inner"] = strategy_to_json(spec.inner.front());
  return j;
}

IntervalSet parse_subset(const json& j, const std::string& where) {
  std::vector<Interval> parts;
  int index = 0;
  for (const auto& pair : get_array(j, where)) {
    std::string pwhere = where + "[" + std::to_string(index++) + "]";
    if (!pair.is_array() || pair.size() != 2) fail(pwhere, "expected [lo, hi]");
    Interval part{get_rational(pair.at(0), pwhere + "[0]"),
                  get_rational(pair.at(1), pwhere + "[1]")};
    parts.push_back(std::move(part));
  }
  try {
    return IntervalSet::from_intervals(std::move(parts));
  } catch (const EngineError& e) {
    fail(where, e.what());
  }
}

json subset_to_json(const IntervalSet& subset) {
  json j = json::array();
  for (const auto& part : subset.parts()) {
    j.push_back(json::array({format_rational(part.lo), format_rational(part.hi)}));
  }
  return j;
}

DefectionScript parse_script(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a script object");
  reject_unknown_keys(j, {"planner", "subset", "policy", "from", "to", "label"}, where);
  for (const char* key : {"planner", "subset", "policy"}) {
    if (!j.contains(key)) fail(where, std::string("missing \"") + key + "\"");
  }
  DefectionScript script;
  script.planner = static_cast<int>(get_integer(j.at("planner"), where + ".planner"));
  script.subset = parse_subset(j.at("subset"), where + ".subset");
  std::string policy = get_string(j.at("policy"), where + ".policy");
  if (policy == "bottom") {
    script.policy = DefectionScript::Policy::always_bottom;
  } else if (policy == "top") {
    script.policy = DefectionScript::Policy::always_top;
  } else {
    fail(where + ".policy", "expected \"bottom\" or \"top\"");
  }
  if (j.contains("from")) {
    script.from_stage = static_cast<int>(get_integer(j.at("from"), where + ".from"));
  }
  if (j.contains("to")) {
    const auto& to = j.at("to");
    if (to.is_string() && to.get<std::string>() == "forever") {
      script.to_stage = kForever;
    } else {
      script.to_stage = static_cast<int>(get_integer(to, where + ".to"));
    }
  }
  if (j.contains("label")) script.label = get_string(j.at("label"), where + ".label");
  return script;
}

json script_to_json(const DefectionScript& script) {
  json j;
  j["planner"] = script.planner;
  j["subset"] = subset_to_json(script.subset);
  j["policy"] = script.policy == DefectionScript::Policy::always_bottom ? "bottom" : "top";
  j["from"] = script.from_stage;
  if (script.to_stage == kForever) {
    j["to"] = "forever";
  } else {
    j["to"] = script.to_stage;
  }
  j["label"] = script.label;
  return j;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw EngineError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw EngineError("config error at $: expected a JSON object");
  reject_unknown_keys(j,
                      {"name", "network", "partition", "strategies", "scripts", "horizon",
                       "discounts", "mode", "seed", "identification", "segments"},
                      "$");

  Scenario s;
  if (j.contains("name")) s.name = get_string(j.at("name"), "$.name");
  if (j.contains("network")) s.network = parse_network(j.at("network"), "$.network");

  if (!j.contains("partition")) throw EngineError("config error at $: missing \"partition\"");
  int index = 0;
  for (const auto& share : get_array(j.at("partition"), "$.partition")) {
    s.shares.push_back(get_rational(share, "$.partition[" + std::to_string(index++) + "]"));
  }

  if (!j.contains("strategies")) throw EngineError("config error at $: missing \"strategies\"");
  index = 0;
  for (const auto& strat : get_array(j.at("strategies"), "$.strategies")) {
    s.strategies.push_back(
        parse_strategy(strat, "$.strategies[" + std::to_string(index++) + "]"));
  }
  if (s.strategies.size() != s.shares.size()) {
    throw EngineError("config error at $.strategies: expected one strategy per planner");
  }

  if (j.contains("scripts")) {
    index = 0;
    for (const auto& script : get_array(j.at("scripts"), "$.scripts")) {
      s.scripts.push_back(parse_script(script, "$.scripts[" + std::to_string(index++) + "]"));
    }
  }

  if (j.contains("horizon")) {
    s.horizon = static_cast<int>(get_integer(j.at("horizon"), "$.horizon"));
    if (s.horizon < 1) throw EngineError("config error at $.horizon: must be at least 1");
  }
  if (j.contains("discounts")) {
    index = 0;
    for (const auto& d : get_array(j.at("discounts"), "$.discounts")) {
      s.discounts.push_back(get_rational(d, "$.discounts[" + std::to_string(index++) + "]"));
    }
  } else {
    s.discounts = {Rational(1, 2), Rational(9, 10), Rational(99, 100), Rational(999, 1000)};
  }
  if (j.contains("mode")) {
    std::string mode = get_string(j.at("mode"), "$.mode");
    if (mode == "rational") {
      s.mode = NumberMode::rational;
    } else if (mode == "float") {
      s.mode = NumberMode::floating;
    } else {
      throw EngineError("config error at $.mode: expected \"rational\" or \"float\"");
    }
  }
  if (j.contains("seed")) {
    long long seed = get_integer(j.at("seed"), "$.seed");
    if (seed < 0) throw EngineError("config error at $.seed: must be nonnegative");
    s.seed = static_cast<unsigned long long>(seed);
  }
  if (j.contains("identification")) {
    s.identification = get_bool(j.at("identification"), "$.identification");
  }
  if (j.contains("segments")) {
    s.segments = static_cast<int>(get_integer(j.at("segments"), "$.segments"));
    if (s.segments < 1) throw EngineError("config error at $.segments: must be at least 1");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EngineError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string dump_scenario(const Scenario& scenario) {
  json j;
  j["name"] = scenario.name;
  j["network"] = network_to_json(scenario.network);
  json partition = json::array();
  for (const auto& share : scenario.shares) partition.push_back(format_rational(share));
  j["partition"] = std::move(partition);
  json strategies = json::array();
  for (const auto& spec : scenario.strategies) strategies.push_back(strategy_to_json(spec));
  j["strategies"] = std::move(strategies);
  json scripts = json::array();
  for (const auto& script : scenario.scripts) scripts.push_back(script_to_json(script));
  j["scripts"] = std::move(scripts);
  j["horizon"] = scenario.horizon;
  json discounts = json::array();
  for (const auto& d : scenario.discounts) discounts.push_back(format_rational(d));
  j["discounts"] = std::move(discounts);
  j["mode"] = scenario.mode == NumberMode::rational ? "rational" : "float";
  j["seed"] = scenario.seed;
  j["identification"] = scenario.identification;
  j["segments"] = scenario.segments;
  return j.dump(2) + "\n";
}

std::string config_hash(const Scenario& scenario) {
  const std::string text = dump_scenario(scenario);
  unsigned long long hash = 14695981039346656037ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

Network build_network(const NetworkSpec& spec) {
  if (spec.pigou) return pigou();
  std::vector<Edge> edges;
  auto node_index = [&](const std::string& name, const std::string& what) {
    for (size_t i = 0; i < spec.nodes.size(); ++i) {
      if (spec.nodes[i] == name) return static_cast<int>(i);
    }
    throw EngineError("config error: " + what + " references unknown node \"" + name + "\"");
  };
  for (const auto& e : spec.edges) {
    edges.push_back({node_index(e.tail, "edge tail"), node_index(e.head, "edge head"), e.cost});
  }
  node_index(spec.source, "source");
  node_index(spec.sink, "sink");
  return Network(spec.nodes, std::move(edges), spec.source, spec.sink);
}

std::unique_ptr<PlannerStrategy> build_strategy(const StrategySpec& spec,
                                                const Partition& partition, int self,
                                                PigouPaths paths) {
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) {
      throw EngineError("config error: " + spec.kind + " strategy for planner " +
                        std::to_string(self) + " " + what);
    }
  };
  if (spec.kind == "static") {
    require(spec.fraction.has_value(), "needs \"fraction\"");
    require(spec.inner.empty() && !spec.stage && !spec.length && !spec.detect_eps &&
                !spec.initial && !spec.delta,
            "has fields that do not apply");
    return std::make_unique<StaticStrategy>(*spec.fraction, paths);
  }
  if (spec.kind == "punishment") {
    require(!spec.fraction && !spec.initial && !spec.delta && !spec.stage && spec.inner.empty(),
            "has fields that do not apply");
    return std::make_unique<PunishmentStrategy>(partition, self, paths, spec.length,
                                                spec.detect_eps.value_or(Rational(0)));
  }
  if (spec.kind == "edge_case") {
    require(!spec.fraction && !spec.initial && !spec.delta && !spec.stage && !spec.length &&
                spec.inner.empty(),
            "has fields that do not apply");
    return std::make_unique<EdgeCasePunishmentStrategy>(partition, self, paths,
                                                        spec.detect_eps.value_or(Rational(0)));
  }
  if (spec.kind == "myopic") {
    require(!spec.fraction && !spec.length && !spec.detect_eps && !spec.delta && !spec.stage &&
                spec.inner.empty(),
            "has fields that do not apply");
    return std::make_unique<MyopicStrategy>(partition.share(self), paths,
                                            spec.initial.value_or(Rational(1, 2)));
  }
  if (spec.kind == "redemption") {
    require(!spec.fraction && !spec.length && !spec.detect_eps && !spec.initial && !spec.stage &&
                spec.inner.empty(),
            "has fields that do not apply");
    return std::make_unique<RedemptionStrategy>(partition, self, paths,
                                                spec.delta.value_or(Rational(1, 100)));
  }
  if (spec.kind == "one_shot") {
    require(spec.fraction.has_value(), "needs \"fraction\"");
    require(spec.stage.has_value(), "needs \"stage\"");
    require(spec.inner.size() == 1, "needs exactly one \"inner\" strategy");
    require(!spec.length && !spec.detect_eps && !spec.initial && !spec.delta,
            "has fields that do not apply");
    return std::make_unique<OneShotDeviationStrategy>(
        build_strategy(spec.inner.front(), partition, self, paths), *spec.stage, *spec.fraction,
        paths);
  }
  throw EngineError("config error: unknown strategy kind \"" + spec.kind + "\"");
}

template <GameScalar S>
GameRunner<S> build_runner(const Scenario& scenario) {
  Network network = build_network(scenario.network);
  PigouPaths paths = pigou_paths(network);
  Partition partition(scenario.shares);
  std::vector<std::unique_ptr<PlannerStrategy>> strategies;
  for (size_t i = 0; i < scenario.strategies.size(); ++i) {
    strategies.push_back(build_strategy(scenario.strategies[i], partition,
                                        static_cast<int>(i), paths));
  }
  return GameRunner<S>(std::move(network), std::move(partition), std::move(strategies),
                       scenario.scripts, scenario.identification);
}

template GameRunner<Rational> build_runner<Rational>(const Scenario&);
template GameRunner<double> build_runner<double>(const Scenario&);

}  // namespace routing
