#pragma once

#include <optional>
#include <string>

#include "routing/game.hpp"
#include "routing/scenario.hpp"
#include "routing/verify.hpp"

namespace routing {

inline constexpr const char* kEngineVersion = "1.0.0";

/// Reproducibility header prepended to every output file: engine version,
/// scenario seed, and canonical config hash. Deliberately timestamp-free
/// so identical runs produce identical bytes.
std::string output_header(const Scenario& scenario);

/// One JSON object per line per stage: stage index, per-planner realized
/// bottom fractions, per-edge flows, total cost, and per-planner costs.
/// Rationals are "p/q" strings; float-mode costs are decimal numbers.
template <GameScalar S>
std::string history_jsonl(const History<S>& history);

/// CSV summary, one row per stage: stage, bottom_flow, total_cost.
template <GameScalar S>
std::string history_csv(const History<S>& history);

/// Canonical JSON rendering of a verification report.
std::string report_json(const VerificationReport& report);

/// Canonical JSON rendering of a profitable-defection search result.
std::string witness_json(const std::optional<DefectionWitness>& witness,
                         const Rational& discount, int segments, int horizon);

}  // namespace routing
