#include "routing/equilibrium.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace routing {

Partition::Partition(std::vector<Rational> shares) : shares_(std::move(shares)) {
  if (shares_.empty()) throw EngineError("partition must have at least one planner");
  Rational total(0);
  for (const auto& a : shares_) {
    if (a <= 0) throw EngineError("partition shares must be positive");
    total += a;
  }
  if (total != 1) throw EngineError("partition shares must sum to exactly 1");
}

namespace {

template <GameScalar S>
void check_profile(const Partition& partition, const std::vector<S>& lambdas) {
  if (static_cast<int>(lambdas.size()) != partition.size()) {
    throw EngineError("profile size must match the partition");
  }
  for (const auto& l : lambdas) {
    if (l < S(0) || l > S(1)) throw EngineError("fractions must lie in [0, 1]");
  }
}

template <GameScalar S>
S others_flow(const Partition& partition, const std::vector<S>& lambdas, int i) {
  S f(0);
  for (int j = 0; j < partition.size(); ++j) {
    if (j == i) continue;
    f = f + ScalarTraits<S>::from(partition.share(j)) * lambdas[j];
  }
  return f;
}

}  // namespace

template <GameScalar S>
S one_shot_planner_cost(const Partition& partition, const std::vector<S>& lambdas, int i) {
  check_profile(partition, lambdas);
  S a = ScalarTraits<S>::from(partition.share(i));
  S l = lambdas[i];
  S rest = others_flow(partition, lambdas, i);
  S direct = (S(1) - l) + l * (a * l + rest);
  S expanded = a * l * l + (rest - S(1)) * l + S(1);
  if (!ScalarTraits<S>::eq(direct, expanded)) {
    throw EngineError("planner cost forms disagree");
  }
  return direct;
}

template <GameScalar S>
S best_response(const Partition& partition, const std::vector<S>& lambdas, int i) {
  check_profile(partition, lambdas);
  S a = ScalarTraits<S>::from(partition.share(i));
  S vertex = (S(1) - others_flow(partition, lambdas, i)) / (S(2) * a);
  if (vertex < S(0)) return S(0);
  if (vertex > S(1)) return S(1);
  return vertex;
}

template <GameScalar S>
EquilibriumSolution<S> solve_planner_equilibrium(const Partition& partition) {
  int n = partition.size();
  std::vector<Rational> sorted = partition.shares();
  std::sort(sorted.begin(), sorted.end());

  // Scan for the first k where the (k+1)-th smallest share stays interior:
  // the k smallest shares saturate at fraction 1 and the rest satisfy
  // a_i l_i = 1 - F.
  Rational prefix(0);
  Rational F;
  for (int k = 0; k < n; ++k) {
    Rational candidate = (prefix + (n - k)) / (n - k + 1);
    if (sorted[k] >= 1 - candidate) {
      F = candidate;
      break;
    }
    prefix += sorted[k];
    if (k == n - 1) throw EngineError("equilibrium scan failed to terminate");
  }

  EquilibriumSolution<S> out;
  out.lambdas.reserve(n);
  S flow(0);
  for (int i = 0; i < n; ++i) {
    Rational ratio = (1 - F) / partition.share(i);
    S l = ratio > 1 ? S(1) : ScalarTraits<S>::from(ratio);
    flow = flow + ScalarTraits<S>::from(partition.share(i)) * l;
    out.lambdas.push_back(l);
  }
  out.bottom_flow = flow;
  return out;
}

template <GameScalar S>
EquilibriumCheck<S> verify_planner_equilibrium(const Partition& partition,
                                               const std::vector<S>& lambdas, const S& tol) {
  check_profile(partition, lambdas);
  for (int i = 0; i < partition.size(); ++i) {
    S br = best_response(partition, lambdas, i);
    S diff = br > lambdas[i] ? br - lambdas[i] : lambdas[i] - br;
    if (diff > tol) {
      EquilibriumCheck<S> fail;
      fail.valid = false;
      fail.planner = i;
      fail.better_lambda = br;
      std::vector<S> alt = lambdas;
      alt[i] = br;
      fail.cost_drop =
          one_shot_planner_cost(partition, lambdas, i) - one_shot_planner_cost(partition, alt, i);
      return fail;
    }
  }
  EquilibriumCheck<S> ok;
  ok.valid = true;
  return ok;
}

namespace {

template <GameScalar S>
std::optional<EquilibriumSolution<S>> clamp_pattern_limit(const Partition& partition,
                                                          const std::vector<bool>& clamped,
                                                          const S& tol) {
  // Interior planners share a_i l_i = 1 - F; together with the saturated
  // shares this pins F without any sorting.
  int n = partition.size();
  Rational saturated(0);
  int interior = 0;
  for (int i = 0; i < n; ++i) {
    if (clamped[i]) {
      saturated += partition.share(i);
    } else {
      ++interior;
    }
  }
  Rational one_minus_F = (1 - saturated) / (interior + 1);
  std::vector<S> candidate(n);
  S flow(0);
  for (int i = 0; i < n; ++i) {
    if (clamped[i]) {
      candidate[i] = S(1);
    } else {
      Rational l = one_minus_F / partition.share(i);
      if (l < 0 || l > 1) return std::nullopt;
      candidate[i] = ScalarTraits<S>::from(l);
    }
    flow = flow + ScalarTraits<S>::from(partition.share(i)) * candidate[i];
  }
  if (!verify_planner_equilibrium(partition, candidate, tol).valid) return std::nullopt;
  EquilibriumSolution<S> out;
  out.lambdas = std::move(candidate);
  out.bottom_flow = flow;
  return out;
}

template <GameScalar S>
S verification_tol() {
  if constexpr (ScalarTraits<S>::exact) {
    return S(0);
  } else {
    return 1e-9;
  }
}

}  // namespace

template <GameScalar S>
EquilibriumSolution<S> best_response_iteration_oracle(const Partition& partition,
                                                      std::vector<S> start, int max_iters) {
  check_profile(partition, start);
  int n = partition.size();
  S tol = verification_tol<S>();
  std::vector<bool> previous_pattern;
  for (int iter = 0; iter < max_iters; ++iter) {
    for (int i = 0; i < n; ++i) {
      start[i] = best_response(partition, start, i);
    }
    if (verify_planner_equilibrium(partition, start, tol).valid) {
      EquilibriumSolution<S> out;
      S flow(0);
      for (int i = 0; i < n; ++i) {
        flow = flow + ScalarTraits<S>::from(partition.share(i)) * start[i];
      }
      out.lambdas = std::move(start);
      out.bottom_flow = flow;
      return out;
    }
    std::vector<bool> pattern(n);
    for (int i = 0; i < n; ++i) pattern[i] = start[i] == S(1);
    if (pattern == previous_pattern) {
      if (auto limit = clamp_pattern_limit(partition, pattern, tol)) return *limit;
    }
    previous_pattern = std::move(pattern);
  }
  std::ostringstream diag;
  diag << "best-response iteration did not converge in " << max_iters << " sweeps; last iterate:";
  for (const auto& l : start) {
    if constexpr (ScalarTraits<S>::exact) {
      diag << " " << format_rational(l);
    } else {
      diag << " " << l;
    }
  }
  throw EngineError(diag.str());
}

namespace {

// Minimal integer N with N * gap > 1/2 for a positive rational gap:
// floor(1 / (2 gap)) + 1 in every case (integer boundary included).
long long minimal_scans(const Rational& gap) {
  Rational threshold = Rational(1, 2) / gap;
  BigInt n = rational_floor(threshold) + 1;
  return n.convert_to<long long>();
}

}  // namespace

long long compute_punishment_length(const Rational& F) {
  if (F <= Rational(3, 4)) {
    throw EngineError("punishment calibration requires equilibrium flow above 3/4");
  }
  return minimal_scans(F - Rational(3, 4));
}

long long edge_case_punishment_length(const Rational& observed, const Rational& prescribed,
                                      const Rational& lambda_max) {
  if (observed <= prescribed) {
    throw EngineError("edge-case calibration requires observed flow above the prescription");
  }
  if (lambda_max >= 1) {
    throw EngineError("edge-case calibration requires an interior equilibrium (lambda_max < 1)");
  }
  long long deterrence = minimal_scans(observed - prescribed);
  long long exposure = minimal_scans((1 - lambda_max) / 4);
  return std::max(deterrence, exposure);
}

template Rational one_shot_planner_cost<Rational>(const Partition&, const std::vector<Rational>&, int);
template double one_shot_planner_cost<double>(const Partition&, const std::vector<double>&, int);
template Rational best_response<Rational>(const Partition&, const std::vector<Rational>&, int);
template double best_response<double>(const Partition&, const std::vector<double>&, int);
template EquilibriumSolution<Rational> solve_planner_equilibrium<Rational>(const Partition&);
template EquilibriumSolution<double> solve_planner_equilibrium<double>(const Partition&);
template EquilibriumCheck<Rational> verify_planner_equilibrium<Rational>(
    const Partition&, const std::vector<Rational>&, const Rational&);
template EquilibriumCheck<double> verify_planner_equilibrium<double>(const Partition&,
                                                                     const std::vector<double>&,
                                                                     const double&);
template EquilibriumSolution<Rational> best_response_iteration_oracle<Rational>(
    const Partition&, std::vector<Rational>, int);
template EquilibriumSolution<double> best_response_iteration_oracle<double>(const Partition&,
                                                                            std::vector<double>,
                                                                            int);

}  // namespace routing
