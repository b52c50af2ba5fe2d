#include "routing/cli.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "routing/equilibrium.hpp"
#include "routing/scenario.hpp"
#include "routing/trace.hpp"
#include "routing/verify.hpp"

namespace routing {

namespace {

using nlohmann::json;

std::vector<Rational> parse_rational_csv(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto lo = item.find_first_not_of(" \t");
    const auto hi = item.find_last_not_of(" \t");
    if (lo == std::string::npos) throw EngineError("empty entry in rational list");
    out.push_back(parse_rational(item.substr(lo, hi - lo + 1)));
  }
  if (out.empty()) throw EngineError("expected a comma-separated list of rationals");
  return out;
}

json meta_json(const Scenario& scenario) {
  json m;
  m["config"] = config_hash(scenario);
  m["engine"] = std::string("routeplan ") + kEngineVersion;
  m["seed"] = scenario.seed;
  return m;
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path path(dir);
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw EngineError("cannot create output directory: " + dir);
  return path;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw EngineError("cannot write output file: " + path.string());
  file << content;
  if (!file) throw EngineError("cannot write output file: " + path.string());
}

std::string subset_str(const IntervalSet& subset) {
  std::ostringstream os;
  bool first = true;
  for (const auto& part : subset.parts()) {
    if (!first) os << " + ";
    first = false;
    os << "[" << format_rational(part.lo) << ", " << format_rational(part.hi) << ")";
  }
  if (first) os << "(empty)";
  return os.str();
}

int cmd_equilibrium(const std::vector<Rational>& shares, std::ostream& out) {
  Partition partition(shares);
  auto solution = solve_planner_equilibrium<Rational>(partition);
  out << "lambda = (";
  for (std::size_t i = 0; i < solution.lambdas.size(); ++i) {
    if (i) out << ", ";
    out << format_rational(solution.lambdas[i]);
  }
  out << ")\n";
  out << "F = " << format_rational(solution.bottom_flow) << "\n";
  return 0;
}

template <GameScalar S>
void write_trace_files(const Scenario& scenario, int horizon, const std::filesystem::path& dir,
                       std::ostream& out) {
  auto runner = build_runner<S>(scenario);
  runner.run(horizon);
  write_file(dir / "trace.jsonl", meta_json(scenario).dump() + "\n" + history_jsonl(runner.history()));
  write_file(dir / "summary.csv", output_header(scenario) + history_csv(runner.history()));
  out << output_header(scenario);
  out << "wrote " << (dir / "trace.jsonl").string() << "\n";
  out << "wrote " << (dir / "summary.csv").string() << "\n";
}

int cmd_simulate(const Scenario& scenario, int horizon, NumberMode mode,
                 const std::string& out_dir, std::ostream& out) {
  auto dir = prepare_out_dir(out_dir);
  if (mode == NumberMode::rational) {
    write_trace_files<Rational>(scenario, horizon, dir, out);
  } else {
    write_trace_files<double>(scenario, horizon, dir, out);
  }
  return 0;
}

int cmd_verify(const Scenario& scenario, const DeviationFamily& family,
               const std::vector<Rational>& discounts, int horizon,
               const std::optional<std::string>& out_dir, std::ostream& out) {
  // Deterrence and resilience are properties of the strategy profile, so
  // they run with the scenario's scripts stripped; recovery and the
  // per-stage collective check run on the configured episode as-is.
  Scenario bare = scenario;
  bare.scripts.clear();
  auto profile = build_runner<Rational>(bare);
  auto episode = build_runner<Rational>(scenario);

  std::vector<VerificationReport> reports;
  reports.push_back(check_optimality(episode, horizon));
  reports.push_back(check_individual_rationality(profile, family, discounts, horizon));
  reports.push_back(check_resilience(profile, family, discounts, horizon));

  GameRunner<Rational> base(episode);
  base.run(horizon);
  VerificationReport collective;
  int collective_stage = 0;
  for (const auto& record : base.history()) {
    collective = check_no_collective_punishment(record, base.partition());
    collective_stage = record.stage;
    if (collective.violation) break;
  }

  out << output_header(scenario);
  bool any_violation = false;
  for (const auto& report : reports) {
    any_violation = any_violation || report.violation;
    out << report.desideratum << ": " << (report.violation ? "VIOLATION" : "pass") << "; "
        << report.summary << "\n";
  }
  any_violation = any_violation || collective.violation;
  if (collective.violation) {
    const auto& w = *collective.collective_witness;
    out << "no_collective_punishment: VIOLATION; stage " << collective_stage << ": planner "
        << w.planner << " at fraction " << format_rational(w.fraction)
        << " lowers every planner's cost\n";
  } else {
    out << "no_collective_punishment: pass; no stage admits a collective improvement ("
        << horizon << " stages)\n";
  }

  if (out_dir) {
    json checks = json::array();
    for (const auto& report : reports) checks.push_back(json::parse(report_json(report)));
    json coll = json::parse(report_json(collective));
    coll["stage"] = collective_stage;
    checks.push_back(std::move(coll));
    json root;
    root["checks"] = std::move(checks);
    root["meta"] = meta_json(scenario);
    write_file(prepare_out_dir(*out_dir) / "report.json", root.dump(2) + "\n");
  }
  return any_violation ? 1 : 0;
}

int cmd_impossibility(const Scenario& scenario, int segments, const Rational& discount,
                      int horizon, const std::optional<std::string>& out_dir, std::ostream& out) {
  auto runner = build_runner<Rational>(scenario);
  auto witness = find_profitable_defection(runner, segments, discount, horizon);

  out << output_header(scenario);
  if (witness) {
    out << "profitable defection: planner " << witness->planner << ", segment "
        << witness->segment << " of " << segments << ", policy bottom\n";
    out << "subset: " << subset_str(witness->script.subset) << "\n";
    out << "deviated cost ~" << to_double(witness->deviated_cost) << " < baseline cost ~"
        << to_double(witness->baseline_cost) << " at discount " << format_rational(discount)
        << " (exact values in witness.json)\n";
  } else {
    out << "no profitable defection found (" << segments << " segments per planner, discount "
        << format_rational(discount) << ", horizon " << horizon << ")\n";
  }

  if (out_dir) {
    json root = json::parse(witness_json(witness, discount, segments, horizon));
    root["meta"] = meta_json(scenario);
    write_file(prepare_out_dir(*out_dir) / "witness.json", root.dump(2) + "\n");
  }
  return witness ? 1 : 0;
}

Scenario synthetic_impossibility(int n, std::optional<long long> punishment) {
  Scenario scenario;
  scenario.name = "impossibility-n" + std::to_string(n);
  scenario.shares.assign(static_cast<std::size_t>(n), Rational(1, n));
  StrategySpec spec;
  spec.kind = "punishment";
  spec.length = punishment;
  scenario.strategies.assign(static_cast<std::size_t>(n), spec);
  scenario.discounts = default_discount_grid();
  return scenario;
}

int cmd_sweep(int from, int to, const std::optional<std::string>& out_dir, std::ostream& out) {
  if (to < from) throw EngineError("sweep range must be nondecreasing");
  std::vector<std::future<EquilibriumSolution<Rational>>> futures;
  for (int n = from; n <= to; ++n) {
    futures.push_back(std::async(std::launch::async, [n] {
      Partition partition(std::vector<Rational>(static_cast<std::size_t>(n), Rational(1, n)));
      return solve_planner_equilibrium<Rational>(partition);
    }));
  }
  std::ostringstream body;
  body << "n,F,lambda\n";
  for (int n = from; n <= to; ++n) {
    auto solution = futures[static_cast<std::size_t>(n - from)].get();
    body << n << "," << format_rational(solution.bottom_flow) << ","
         << format_rational(solution.lambdas.front()) << "\n";
  }
  std::string header = std::string("# engine: routeplan ") + kEngineVersion + "\n# sweep: equal partitions, n = " +
                       std::to_string(from) + ".." + std::to_string(to) + "\n";
  out << header << body.str();
  if (out_dir) write_file(prepare_out_dir(*out_dir) / "sweep.csv", header + body.str());
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"repeated routing games on the two-route congestion network", "routeplan"};
  app.require_subcommand(1);

  auto* eq = app.add_subcommand("equilibrium", "solve the one-shot planner equilibrium");
  std::string eq_config, eq_partition;
  auto* eq_config_opt = eq->add_option("--config", eq_config, "scenario file");
  auto* eq_partition_opt = eq->add_option("--partition", eq_partition,
                                          "comma-separated planner shares, e.g. 1/4,1/4,1/4,1/4");
  eq_config_opt->excludes(eq_partition_opt);

  auto* sim = app.add_subcommand("simulate", "run a scenario and write stage traces");
  std::string sim_config, sim_out, sim_mode;
  int sim_horizon = 0;
  sim->add_option("--config", sim_config, "scenario file")->required();
  sim->add_option("--out", sim_out, "output directory")->required();
  auto* sim_horizon_opt =
      sim->add_option("--horizon", sim_horizon, "stage count override")->check(CLI::PositiveNumber);
  auto* sim_mode_opt = sim->add_option("--mode", sim_mode, "number mode override")
                           ->check(CLI::IsMember({"rational", "float"}));

  auto* ver = app.add_subcommand("verify", "check the four equilibrium desiderata");
  std::string ver_config, ver_out;
  int ver_horizon = 0, ver_segments = 0;
  std::vector<std::string> ver_discounts;
  ver->add_option("--config", ver_config, "scenario file")->required();
  auto* ver_horizon_opt =
      ver->add_option("--horizon", ver_horizon, "stage count override")->check(CLI::PositiveNumber);
  auto* ver_segments_opt = ver->add_option("--segments", ver_segments, "car segments per planner")
                               ->check(CLI::PositiveNumber);
  ver->add_option("--discount", ver_discounts, "discount factor (repeatable)");
  auto* ver_out_opt = ver->add_option("--out", ver_out, "output directory");

  auto* imp = app.add_subcommand("impossibility", "search for a profitable car defection");
  std::string imp_config, imp_out, imp_discount;
  int imp_n = 0, imp_segments = 0, imp_horizon = 0;
  long long imp_punishment = 0;
  auto* imp_config_opt = imp->add_option("--config", imp_config, "scenario file");
  auto* imp_n_opt =
      imp->add_option("--n", imp_n, "equal partition size")->check(CLI::PositiveNumber);
  imp_config_opt->excludes(imp_n_opt);
  auto* imp_punishment_opt =
      imp->add_option("--punishment", imp_punishment, "punishment length override")
          ->check(CLI::PositiveNumber);
  auto* imp_segments_opt = imp->add_option("--segments", imp_segments, "car segments per planner")
                               ->check(CLI::PositiveNumber);
  auto* imp_discount_opt = imp->add_option("--discount", imp_discount, "discount factor");
  auto* imp_horizon_opt =
      imp->add_option("--horizon", imp_horizon, "stage count override")->check(CLI::PositiveNumber);
  auto* imp_out_opt = imp->add_option("--out", imp_out, "output directory");

  auto* sw = app.add_subcommand("sweep", "equilibrium flow across equal partition sizes");
  int sw_from = 1, sw_to = 6;
  std::string sw_out;
  sw->add_option("--from", sw_from, "first partition size")->check(CLI::PositiveNumber);
  sw->add_option("--to", sw_to, "last partition size")->check(CLI::PositiveNumber);
  auto* sw_out_opt = sw->add_option("--out", sw_out, "output directory");

  try {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("routeplan");
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (eq->parsed()) {
      std::vector<Rational> shares;
      if (*eq_config_opt) {
        shares = load_scenario(eq_config).shares;
      } else if (*eq_partition_opt) {
        shares = parse_rational_csv(eq_partition);
      } else {
        throw EngineError("equilibrium needs --config or --partition");
      }
      return cmd_equilibrium(shares, out);
    }

    if (sim->parsed()) {
      Scenario scenario = load_scenario(sim_config);
      int horizon = *sim_horizon_opt ? sim_horizon : scenario.horizon;
      NumberMode mode = scenario.mode;
      if (*sim_mode_opt) mode = sim_mode == "float" ? NumberMode::floating : NumberMode::rational;
      return cmd_simulate(scenario, horizon, mode, sim_out, out);
    }

    if (ver->parsed()) {
      Scenario scenario = load_scenario(ver_config);
      DeviationFamily family;
      family.segments = *ver_segments_opt ? ver_segments : scenario.segments;
      std::vector<Rational> discounts = scenario.discounts;
      if (!ver_discounts.empty()) {
        discounts.clear();
        for (const auto& d : ver_discounts) discounts.push_back(parse_rational(d));
      }
      int horizon = *ver_horizon_opt ? ver_horizon : scenario.horizon;
      std::optional<std::string> out_dir;
      if (*ver_out_opt) out_dir = ver_out;
      return cmd_verify(scenario, family, discounts, horizon, out_dir, out);
    }

    if (imp->parsed()) {
      Scenario scenario;
      if (*imp_config_opt) {
        scenario = load_scenario(imp_config);
      } else if (*imp_n_opt) {
        std::optional<long long> punishment;
        if (*imp_punishment_opt) punishment = imp_punishment;
        scenario = synthetic_impossibility(imp_n, punishment);
      } else {
        throw EngineError("impossibility needs --config or --n");
      }
      int segments = *imp_segments_opt ? imp_segments : scenario.segments;
      int horizon = *imp_horizon_opt ? imp_horizon : scenario.horizon;
      Rational discount =
          *imp_discount_opt ? parse_rational(imp_discount) : Rational(99, 100);
      std::optional<std::string> out_dir;
      if (*imp_out_opt) out_dir = imp_out;
      return cmd_impossibility(scenario, segments, discount, horizon, out_dir, out);
    }

    if (sw->parsed()) {
      std::optional<std::string> out_dir;
      if (*sw_out_opt) out_dir = sw_out;
      return cmd_sweep(sw_from, sw_to, out_dir, out);
    }
  } catch (const EngineError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace routing
