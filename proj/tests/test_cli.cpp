#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "routing/cli.hpp"
#include "routing/scenario.hpp"
#include "routing/trace.hpp"

using namespace routing;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "routeplan");
  std::ostringstream out, err;
  CliResult result;
  result.code = run_cli(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::string config_path(const std::string& name) {
  return std::string(TEST_CONFIG_DIR) + "/" + name;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / "routeplan-test-cli" / tag;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Reference FNV-1a, written out independently of the engine's hasher.
std::string fnv1a_hex(const std::string& text) {
  unsigned long long h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h = (h ^ c) * 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) os << ((h >> shift) & 0xF);
  return os.str();
}

const char* kAllConfigs[] = {
    "four-equal-punishment.json", "two-planner-impossibility.json",
    "redemption-identification.json", "static-split.json", "all-bottom.json",
};

}  // namespace

TEST_CASE("config files round-trip byte-identically") {
  for (const char* name : kAllConfigs) {
    CAPTURE(name);
    const std::string text = read_file(config_path(name));
    Scenario parsed = parse_scenario(text);
    CHECK(dump_scenario(parsed) == text);
    CHECK(dump_scenario(parse_scenario(dump_scenario(parsed))) == dump_scenario(parsed));
    CHECK(config_hash(parsed) == fnv1a_hex(text));
  }
}

TEST_CASE("scenario parsing fills defaults and preserves fields") {
  Scenario s = parse_scenario(R"({
    "partition": ["1/2", "1/2"],
    "strategies": [{"kind": "static", "fraction": "1/2"},
                   {"kind": "static", "fraction": "1/2"}]
  })");
  CHECK(s.name == "scenario");
  CHECK(s.network.pigou);
  CHECK(s.horizon == 120);
  CHECK(s.discounts == std::vector<Rational>{Rational(1, 2), Rational(9, 10), Rational(99, 100),
                                             Rational(999, 1000)});
  CHECK(s.mode == NumberMode::rational);
  CHECK(s.seed == 0);
  CHECK_FALSE(s.identification);
  CHECK(s.segments == 20);

  Scenario t = parse_scenario(dump_scenario(s));
  CHECK(t.shares == s.shares);
  CHECK(t.strategies == s.strategies);
  CHECK(config_hash(t) == config_hash(s));

  Scenario other = s;
  other.horizon = 121;
  CHECK(config_hash(other) != config_hash(s));
}

TEST_CASE("scenario parsing reports precise locations") {
  CHECK_THROWS_WITH_AS(parse_scenario("{\n  \"partition\": [\n}"),
                       doctest::Contains("config parse error"), EngineError);
  CHECK_THROWS_WITH_AS(parse_scenario("{\n  \"partition\": [\n}"), doctest::Contains("line 3"),
                       EngineError);
  CHECK_THROWS_AS(parse_scenario("[]"), EngineError);
  CHECK_THROWS_WITH_AS(parse_scenario(R"({"partition": ["1/2","1/2"], "strategies":
                                        [{"kind":"static","fraction":"1/2"},
                                         {"kind":"static","fraction":"1/2"}], "bogus": 1})"),
                       "config error at $: unknown key \"bogus\"", EngineError);
  CHECK_THROWS_WITH_AS(parse_scenario(R"({"strategies": []})"),
                       "config error at $: missing \"partition\"", EngineError);
  CHECK_THROWS_WITH_AS(
      parse_scenario(R"({"partition": ["1/2","1/2"], "strategies": [{"kind":"myopic"}]})"),
      "config error at $.strategies: expected one strategy per planner", EngineError);
  CHECK_THROWS_WITH_AS(
      parse_scenario(R"({"partition": [0.5, 0.5], "strategies":
                        [{"kind":"myopic"},{"kind":"myopic"}]})"),
      "config error at $.partition[0]: expected a rational as a \"p/q\" string", EngineError);
  CHECK_THROWS_WITH_AS(
      parse_scenario(R"({"partition": ["1/2","1/2"], "strategies":
                        [{"kind":"myopic"},{"kind":"myopic"}], "horizon": 0})"),
      "config error at $.horizon: must be at least 1", EngineError);
  CHECK_THROWS_WITH_AS(
      parse_scenario(R"({"partition": ["1/2","1/2"], "strategies":
                        [{"kind":"myopic"},{"kind":"myopic"}], "mode": "exact"})"),
      "config error at $.mode: expected \"rational\" or \"float\"", EngineError);
  CHECK_THROWS_WITH_AS(
      build_runner<Rational>(parse_scenario(R"({"partition": ["1/2","1/2"], "strategies":
                        [{"kind":"myopic"},{"kind":"static"}]})")),
      "config error: static strategy for planner 1 needs \"fraction\"", EngineError);
  CHECK_THROWS_WITH_AS(
      build_runner<Rational>(parse_scenario(R"({"partition": ["1/2","1/2"], "strategies":
                        [{"kind":"grim"},{"kind":"myopic"}]})")),
      "config error: unknown strategy kind \"grim\"", EngineError);
  CHECK_THROWS_WITH_AS(load_scenario("/nonexistent/config.json"),
                       "cannot open config file: /nonexistent/config.json", EngineError);
}

TEST_CASE("strategy validation flags misplaced fields at build time") {
  auto strategies = [](const std::string& body) {
    return parse_scenario(R"({"partition": ["1"], "strategies": [)" + body + "]}");
  };
  auto build = [&](const std::string& body) { return build_runner<Rational>(strategies(body)); };
  CHECK_THROWS_WITH_AS(build(R"({"kind":"punishment","fraction":"1/2"})"),
                       "config error: punishment strategy for planner 0 has fields that do not "
                       "apply",
                       EngineError);
  CHECK_THROWS_WITH_AS(build(R"({"kind":"one_shot","fraction":"1"})"),
                       "config error: one_shot strategy for planner 0 needs \"stage\"",
                       EngineError);
  CHECK_THROWS_WITH_AS(build(R"({"kind":"one_shot","fraction":"1","stage":2})"),
                       "config error: one_shot strategy for planner 0 needs exactly one "
                       "\"inner\" strategy",
                       EngineError);

  Scenario nested = strategies(
      R"({"kind":"one_shot","fraction":"1","stage":2,"inner":{"kind":"static","fraction":"1/2"}})");
  auto runner = build_runner<Rational>(nested);
  runner.run(3);
  CHECK(runner.history()[0].bottom_flow == Rational(1, 2));
  CHECK(runner.history()[1].bottom_flow == Rational(1));
  CHECK(runner.history()[2].bottom_flow == Rational(1, 2));
  CHECK(dump_scenario(parse_scenario(dump_scenario(nested))) == dump_scenario(nested));
}

TEST_CASE("float mode runs the same measures with double costs") {
  Scenario s = load_scenario(config_path("four-equal-punishment.json"));
  auto exact = build_runner<Rational>(s);
  auto approx = build_runner<double>(s);
  exact.run(20);
  approx.run(20);
  for (int k = 0; k < 20; ++k) {
    CHECK(exact.history()[k].bottom_flow == approx.history()[k].bottom_flow);
    CHECK(to_double(exact.history()[k].total_cost) ==
          doctest::Approx(approx.history()[k].total_cost).epsilon(1e-12));
  }
}

TEST_CASE("equilibrium command prints the solution") {
  auto result = run({"equilibrium", "--partition", "1/4,1/4,1/4,1/4"});
  CHECK(result.code == 0);
  CHECK(result.out == "lambda = (4/5, 4/5, 4/5, 4/5)\nF = 4/5\n");

  result = run({"equilibrium", "--partition", "0.1, 0.2, 0.7"});
  CHECK(result.code == 0);
  CHECK(result.out == "lambda = (1, 1, 1/2)\nF = 13/20\n");

  result = run({"equilibrium", "--config", config_path("four-equal-punishment.json")});
  CHECK(result.code == 0);
  CHECK(result.out == "lambda = (4/5, 4/5, 4/5, 4/5)\nF = 4/5\n");
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"warp"}).code == 2);
  CHECK(run({"equilibrium"}).code == 2);
  auto both = run({"equilibrium", "--partition", "1", "--config", "x.json"});
  CHECK(both.code == 2);
  CHECK(run({"equilibrium", "--partition", "1/3,1/3"}).code == 2);  // shares must sum to 1
  CHECK(run({"simulate", "--out", "/tmp/x"}).code == 2);            // missing --config
  CHECK(run({"simulate", "--config", "/nonexistent.json", "--out", "/tmp/x"}).code == 2);
  CHECK(run({"verify", "--config", config_path("static-split.json"), "--horizon", "-3"}).code ==
        2);
  CHECK(run({"sweep", "--from", "4", "--to", "2"}).code == 2);
  auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("simulate") != std::string::npos);

  auto bad = run({"simulate", "--config", "/nonexistent.json", "--out", "/tmp/x"});
  CHECK(bad.err.find("cannot open config file") != std::string::npos);
}

TEST_CASE("simulate writes reproducible traces with headers") {
  const std::string config = config_path("four-equal-punishment.json");
  const std::string hash = config_hash(load_scenario(config));
  fs::path dir1 = fresh_dir("sim1");
  fs::path dir2 = fresh_dir("sim2");

  auto first = run({"simulate", "--config", config, "--out", dir1.string(), "--horizon", "20"});
  CHECK(first.code == 0);
  CHECK(first.out.find("# engine: routeplan 1.0.0\n") != std::string::npos);
  CHECK(first.out.find("# config: " + hash + "\n") != std::string::npos);
  CHECK(first.out.find("wrote " + (dir1 / "trace.jsonl").string()) != std::string::npos);

  auto csv = lines_of(read_file(dir1 / "summary.csv"));
  REQUIRE(csv.size() == 24);
  CHECK(csv[0] == "# engine: routeplan 1.0.0");
  CHECK(csv[1] == "# seed: 0");
  CHECK(csv[2] == "# config: " + hash);
  CHECK(csv[3] == "stage,bottom_flow,total_cost");
  CHECK(csv[4] == "1,1/2,3/4");
  CHECK(csv[6] == "3,5/8,49/64");
  CHECK(csv[7] == "4,4/5,21/25");
  CHECK(csv[18] == "15,4/5,21/25");
  CHECK(csv[19] == "16,1/2,3/4");
  CHECK(csv[23] == "20,1/2,3/4");

  auto trace = lines_of(read_file(dir1 / "trace.jsonl"));
  REQUIRE(trace.size() == 21);
  auto meta = nlohmann::json::parse(trace[0]);
  CHECK(meta["engine"] == "routeplan 1.0.0");
  CHECK(meta["seed"] == 0);
  CHECK(meta["config"] == hash);
  auto stage3 = nlohmann::json::parse(trace[3]);
  CHECK(stage3["stage"] == 3);
  CHECK(stage3["planner_bottom"][0] == "1");
  CHECK(stage3["planner_bottom"][1] == "1/2");
  CHECK(stage3["edge_flows"] == nlohmann::json::array({"3/8", "5/8"}));
  CHECK(stage3["total_cost"] == "49/64");
  REQUIRE(stage3["planner_costs"].size() == 4);

  auto second = run({"simulate", "--config", config, "--out", dir2.string(), "--horizon", "20"});
  CHECK(second.code == 0);
  CHECK(read_file(dir1 / "trace.jsonl") == read_file(dir2 / "trace.jsonl"));
  CHECK(read_file(dir1 / "summary.csv") == read_file(dir2 / "summary.csv"));
}

TEST_CASE("simulate in float mode emits decimal costs") {
  fs::path dir = fresh_dir("simfloat");
  auto result = run({"simulate", "--config", config_path("four-equal-punishment.json"), "--out",
                     dir.string(), "--horizon", "5", "--mode", "float"});
  CHECK(result.code == 0);
  auto csv = lines_of(read_file(dir / "summary.csv"));
  CHECK(csv[4] == "1,1/2,0.75");
  CHECK(csv[7].substr(0, 12) == "4,4/5,0.8400");
  auto trace = lines_of(read_file(dir / "trace.jsonl"));
  auto stage1 = nlohmann::json::parse(trace[1]);
  CHECK(stage1["total_cost"].is_number());
  CHECK(stage1["total_cost"] == 0.75);
  CHECK(stage1["planner_bottom"][0] == "1/2");
}

TEST_CASE("verify passes the punishing scenario and writes a report") {
  fs::path dir = fresh_dir("verify-pass");
  auto result = run({"verify", "--config", config_path("four-equal-punishment.json"), "--out",
                     dir.string()});
  CHECK(result.code == 0);
  CHECK(result.out.find("optimality: pass") != std::string::npos);
  CHECK(result.out.find("from stage 16 on (scripted bound: stage 16)") != std::string::npos);
  CHECK(result.out.find("individual_rationality: pass") != std::string::npos);
  CHECK(result.out.find("resilience: pass") != std::string::npos);
  CHECK(result.out.find("no_collective_punishment: pass") != std::string::npos);
  CHECK(result.out.find("VIOLATION") == std::string::npos);

  auto report = nlohmann::json::parse(read_file(dir / "report.json"));
  CHECK(report["meta"]["config"] ==
        config_hash(load_scenario(config_path("four-equal-punishment.json"))));
  REQUIRE(report["checks"].size() == 4);
  CHECK(report["checks"][0]["desideratum"] == "optimality");
  CHECK(report["checks"][0]["violation"] == false);
  CHECK(report["checks"][0]["recovery_stage"] == 15);
  CHECK(report["checks"][0]["implied_bound"] == 15);
  CHECK(report["checks"][1]["desideratum"] == "individual_rationality");
  CHECK(report["checks"][1]["threshold_estimate"] == "9/10");
  CHECK(report["checks"][2]["desideratum"] == "resilience");
  CHECK(report["checks"][3]["desideratum"] == "no_collective_punishment");
  CHECK(report["checks"][3]["stage"] == 120);
}

TEST_CASE("verify flags the naive profiles") {
  auto result = run({"verify", "--config", config_path("static-split.json")});
  CHECK(result.code == 1);
  CHECK(result.out.find("optimality: pass") != std::string::npos);
  CHECK(result.out.find("individual_rationality: VIOLATION") != std::string::npos);
  CHECK(result.out.find("resilience: VIOLATION") != std::string::npos);

  result = run({"verify", "--config", config_path("all-bottom.json")});
  CHECK(result.code == 1);
  CHECK(result.out.find("optimality: VIOLATION") != std::string::npos);
  CHECK(result.out.find("no_collective_punishment: VIOLATION; stage 1:") != std::string::npos);
}

TEST_CASE("impossibility finds the below-threshold witness") {
  fs::path dir = fresh_dir("imp");
  auto result = run({"impossibility", "--n", "2", "--punishment", "11", "--segments", "20",
                     "--discount", "99/100", "--out", dir.string()});
  CHECK(result.code == 1);
  CHECK(result.out.find("profitable defection: planner 0, segment 1 of 20") != std::string::npos);
  CHECK(result.out.find("subset: [0, 1/20)") != std::string::npos);

  auto witness = nlohmann::json::parse(read_file(dir / "witness.json"));
  CHECK(witness["found"] == true);
  CHECK(witness["discount"] == "99/100");
  CHECK(witness["segments"] == 20);
  CHECK(witness["witness"]["planner"] == 0);
  CHECK(witness["witness"]["segment"] == 1);
  CHECK(witness["witness"]["policy"] == "bottom");
  CHECK(witness["meta"]["engine"] == "routeplan 1.0.0");

  auto via_config = run({"impossibility", "--config",
                         config_path("two-planner-impossibility.json"), "--discount", "99/100"});
  CHECK(via_config.code == 1);
  CHECK(via_config.out.find("profitable defection: planner 0, segment 1 of 20") !=
        std::string::npos);
}

TEST_CASE("impossibility reports when no defection profits") {
  fs::path dir = fresh_dir("imp-none");
  auto result = run({"impossibility", "--config", config_path("all-bottom.json"), "--segments",
                     "20", "--out", dir.string()});
  CHECK(result.code == 0);
  CHECK(result.out.find("no profitable defection found") != std::string::npos);
  auto witness = nlohmann::json::parse(read_file(dir / "witness.json"));
  CHECK(witness["found"] == false);
  CHECK(witness["witness"].is_null());

  auto too_coarse = run({"impossibility", "--n", "4", "--segments", "20"});
  CHECK(too_coarse.code == 2);
  CHECK(too_coarse.err.find("segment count too small") != std::string::npos);
}

TEST_CASE("sweep tabulates equal partitions concurrently and deterministically") {
  fs::path dir = fresh_dir("sweep");
  auto result = run({"sweep", "--from", "1", "--to", "6", "--out", dir.string()});
  CHECK(result.code == 0);
  const std::string expected =
      "# engine: routeplan 1.0.0\n"
      "# sweep: equal partitions, n = 1..6\n"
      "n,F,lambda\n"
      "1,1/2,1/2\n"
      "2,2/3,2/3\n"
      "3,3/4,3/4\n"
      "4,4/5,4/5\n"
      "5,5/6,5/6\n"
      "6,6/7,6/7\n";
  CHECK(result.out == expected);
  CHECK(read_file(dir / "sweep.csv") == expected);
  CHECK(run({"sweep", "--from", "1", "--to", "6"}).out == expected);

  auto wide = run({"sweep", "--from", "7", "--to", "40"});
  CHECK(wide.code == 0);
  auto rows = lines_of(wide.out);
  REQUIRE(rows.size() == 3 + 34);
  CHECK(rows[3] == "7,7/8,7/8");
  CHECK(rows.back() == "40,40/41,40/41");
}
