#include "routing/trace.hpp"

#include <sstream>

#include "json.hpp"

namespace routing {

namespace {

using nlohmann::json;

json scalar_to_json(const Rational& value) { return json(format_rational(value)); }
json scalar_to_json(double value) { return json(value); }

std::string scalar_to_csv(const Rational& value) { return format_rational(value); }
std::string scalar_to_csv(double value) { return json(value).dump(); }

json rational_vector(const std::vector<Rational>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(format_rational(v));
  return out;
}

template <GameScalar S>
json scalar_vector(const std::vector<S>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(scalar_to_json(v));
  return out;
}

}  // namespace

std::string output_header(const Scenario& scenario) {
  std::ostringstream os;
  os << "# engine: routeplan " << kEngineVersion << "\n";
  os << "# seed: " << scenario.seed << "\n";
  os << "# config: " << config_hash(scenario) << "\n";
  return os.str();
}

template <GameScalar S>
std::string history_jsonl(const History<S>& history) {
  std::ostringstream os;
  for (const auto& rec : history) {
    json line;
    line["stage"] = rec.stage;
    line["planner_bottom"] = rational_vector(rec.planner_bottom);
    line["edge_flows"] = rational_vector(rec.edge_flows);
    line["total_cost"] = scalar_to_json(rec.total_cost);
    line["planner_costs"] = scalar_vector(rec.planner_costs);
    os << line.dump() << "\n";
  }
  return os.str();
}

template <GameScalar S>
std::string history_csv(const History<S>& history) {
  std::ostringstream os;
  os << "stage,bottom_flow,total_cost\n";
  for (const auto& rec : history) {
    os << rec.stage << "," << format_rational(rec.bottom_flow) << ","
       << scalar_to_csv(rec.total_cost) << "\n";
  }
  return os.str();
}

std::string report_json(const VerificationReport& report) {
  json j;
  j["desideratum"] = report.desideratum;
  j["violation"] = report.violation;
  j["horizon"] = report.horizon;
  j["summary"] = report.summary;
  j["screened"] = report.screened;
  j["threshold_estimate"] =
      report.threshold_estimate ? json(format_rational(*report.threshold_estimate)) : json();
  j["recovery_stage"] = report.recovery_stage ? json(*report.recovery_stage) : json();
  j["implied_bound"] = report.implied_bound ? json(*report.implied_bound) : json();

  if (report.collective_witness) {
    const auto& w = *report.collective_witness;
    json wj;
    wj["planner"] = w.planner;
    wj["fraction"] = format_rational(w.fraction);
    wj["costs_before"] = rational_vector(w.costs_before);
    wj["costs_after"] = rational_vector(w.costs_after);
    j["collective_witness"] = std::move(wj);
  } else {
    j["collective_witness"] = json();
  }

  json outcomes = json::array();
  for (const auto& outcome : report.outcomes) {
    json oj;
    oj["label"] = outcome.label;
    oj["planner"] = outcome.planner;
    oj["violation"] = outcome.violation;
    json comparisons = json::array();
    for (const auto& cmp : outcome.comparisons) {
      json cj;
      cj["discount"] = format_rational(cmp.discount);
      cj["deviated_lower"] = format_rational(cmp.deviated_lower);
      cj["deviated_upper"] = format_rational(cmp.deviated_upper);
      cj["baseline_lower"] = format_rational(cmp.baseline_lower);
      cj["baseline_upper"] = format_rational(cmp.baseline_upper);
      cj["profitable"] = cmp.profitable;
      comparisons.push_back(std::move(cj));
    }
    oj["comparisons"] = std::move(comparisons);
    outcomes.push_back(std::move(oj));
  }
  j["outcomes"] = std::move(outcomes);
  return j.dump(2) + "\n";
}

std::string witness_json(const std::optional<DefectionWitness>& witness,
                         const Rational& discount, int segments, int horizon) {
  json j;
  j["found"] = witness.has_value();
  j["discount"] = format_rational(discount);
  j["segments"] = segments;
  j["horizon"] = horizon;
  if (witness) {
    json wj;
    wj["planner"] = witness->planner;
    wj["segment"] = witness->segment;
    json subset = json::array();
    for (const auto& part : witness->script.subset.parts()) {
      subset.push_back(json::array({format_rational(part.lo), format_rational(part.hi)}));
    }
    wj["subset"] = std::move(subset);
    wj["policy"] =
        witness->script.policy == DefectionScript::Policy::always_bottom ? "bottom" : "top";
    wj["deviated_cost"] = format_rational(witness->deviated_cost);
    wj["baseline_cost"] = format_rational(witness->baseline_cost);
    j["witness"] = std::move(wj);
  } else {
    j["witness"] = json();
  }
  return j.dump(2) + "\n";
}

template std::string history_jsonl<Rational>(const History<Rational>&);
template std::string history_jsonl<double>(const History<double>&);
template std::string history_csv<Rational>(const History<Rational>&);
template std::string history_csv<double>(const History<double>&);

}  // namespace routing
