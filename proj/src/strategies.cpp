#include "routing/strategies.hpp"

#include <algorithm>
#include <utility>

namespace routing {

namespace {

Rational frac1(Rational x) {
  if (x >= 1) x -= 1;
  return x;
}

Rational clamp01(const Rational& x) {
  if (x < 0) return Rational(0);
  if (x > 1) return Rational(1);
  return x;
}

long long rational_ceil_ll(const Rational& x) {
  BigInt fl = rational_floor(x);
  if (Rational(fl) == x) return fl.convert_to<long long>();
  return (fl + 1).convert_to<long long>();
}

void check_self(const Partition& partition, int self) {
  if (self < 0 || self >= partition.size()) {
    throw EngineError("strategy owner index out of range");
  }
}

}  // namespace

RotatedWindow rotate_assignment(const Rational& pointer, const Rational& fraction) {
  RotatedWindow out{wrap_window(pointer, fraction), frac1(pointer + fraction)};
  return out;
}

StaticStrategy::StaticStrategy(Rational fraction, PigouPaths paths)
    : fraction_(std::move(fraction)), paths_(paths) {
  if (fraction_ < 0 || fraction_ > 1) throw EngineError("fractions must lie in [0, 1]");
}

StageAssignment StaticStrategy::decide(int) {
  auto rot = rotate_assignment(pointer_, fraction_);
  pointer_ = rot.pointer;
  return StageAssignment::split(rot.window, paths_.bottom, paths_.top);
}

void StaticStrategy::observe(const LocalStageView&) {}

std::unique_ptr<PlannerStrategy> StaticStrategy::clone() const {
  return std::make_unique<StaticStrategy>(*this);
}

StrategyTrace StaticStrategy::trace() const {
  return {fraction_, pointer_, 0, {}};
}

PunishmentStrategy::PunishmentStrategy(const Partition& partition, int self, PigouPaths paths,
                                       std::optional<long long> punishment_override,
                                       Rational detect_eps)
    : paths_(paths), eps_(std::move(detect_eps)) {
  check_self(partition, self);
  auto sol = solve_planner_equilibrium<Rational>(partition);
  own_lambda_ = sol.lambdas[self];
  flow_ = sol.bottom_flow;
  if (punishment_override) {
    if (*punishment_override < 1) throw EngineError("punishment length must be at least 1");
    length_ = *punishment_override;
  } else {
    length_ = compute_punishment_length(flow_);
  }
  if (eps_ < 0) throw EngineError("detection tolerance must be nonnegative");
}

StageAssignment PunishmentStrategy::decide(int) {
  if (counter_ > 0) {
    last_fraction_ = own_lambda_;
    prescribed_ = flow_;
    --counter_;
  } else {
    last_fraction_ = Rational(1, 2);
    prescribed_ = Rational(1, 2);
  }
  auto rot = rotate_assignment(pointer_, last_fraction_);
  pointer_ = rot.pointer;
  return StageAssignment::split(rot.window, paths_.bottom, paths_.top);
}

void PunishmentStrategy::observe(const LocalStageView& view) {
  if (view.bottom_flow > prescribed_ + eps_) counter_ += length_ + 1;
}

std::unique_ptr<PlannerStrategy> PunishmentStrategy::clone() const {
  return std::make_unique<PunishmentStrategy>(*this);
}

StrategyTrace PunishmentStrategy::trace() const {
  return {last_fraction_, pointer_, counter_, {prescribed_}};
}

EdgeCasePunishmentStrategy::EdgeCasePunishmentStrategy(const Partition& partition, int self,
                                                       PigouPaths paths, Rational detect_eps)
    : paths_(paths), eps_(std::move(detect_eps)) {
  check_self(partition, self);
  auto sol = solve_planner_equilibrium<Rational>(partition);
  own_lambda_ = sol.lambdas[self];
  flow_ = sol.bottom_flow;
  lambda_max_ = *std::max_element(sol.lambdas.begin(), sol.lambdas.end());
  if (flow_ != Rational(3, 4)) {
    throw EngineError("boundary strategy requires equilibrium flow exactly 3/4");
  }
  if (lambda_max_ >= 1) throw EngineError("edge case unachievable");
  if (eps_ < 0) throw EngineError("detection tolerance must be nonnegative");
}

StageAssignment EdgeCasePunishmentStrategy::decide(int) {
  if (counter_ > 0) {
    last_fraction_ = own_lambda_;
    prescribed_ = flow_;
    --counter_;
  } else {
    last_fraction_ = Rational(1, 2);
    prescribed_ = Rational(1, 2);
  }
  auto rot = rotate_assignment(pointer_, last_fraction_);
  pointer_ = rot.pointer;
  return StageAssignment::split(rot.window, paths_.bottom, paths_.top);
}

void EdgeCasePunishmentStrategy::observe(const LocalStageView& view) {
  if (view.bottom_flow > prescribed_ + eps_) {
    long long n = edge_case_punishment_length(view.bottom_flow, prescribed_, lambda_max_);
    counter_ += n + 1;
  }
}

std::unique_ptr<PlannerStrategy> EdgeCasePunishmentStrategy::clone() const {
  return std::make_unique<EdgeCasePunishmentStrategy>(*this);
}

StrategyTrace EdgeCasePunishmentStrategy::trace() const {
  return {last_fraction_, pointer_, counter_, {prescribed_}};
}

MyopicStrategy::MyopicStrategy(const Rational& own_share, PigouPaths paths,
                               Rational initial_fraction)
    : share_(own_share), paths_(paths), initial_(std::move(initial_fraction)) {
  if (share_ <= 0 || share_ > 1) throw EngineError("planner share must lie in (0, 1]");
  if (initial_ < 0 || initial_ > 1) throw EngineError("fractions must lie in [0, 1]");
}

StageAssignment MyopicStrategy::decide(int) {
  if (!observed_) {
    last_fraction_ = initial_;
  } else {
    last_fraction_ = clamp01((1 - others_flow_) / (2 * share_));
  }
  auto rot = rotate_assignment(pointer_, last_fraction_);
  pointer_ = rot.pointer;
  return StageAssignment::split(rot.window, paths_.bottom, paths_.top);
}

void MyopicStrategy::observe(const LocalStageView& view) {
  others_flow_ = view.bottom_flow - share_ * last_fraction_;
  observed_ = true;
}

std::unique_ptr<PlannerStrategy> MyopicStrategy::clone() const {
  return std::make_unique<MyopicStrategy>(*this);
}

StrategyTrace MyopicStrategy::trace() const {
  return {last_fraction_, pointer_, 0, {others_flow_, Rational(observed_ ? 1 : 0)}};
}

RedemptionStrategy::RedemptionStrategy(const Partition& partition, int self, PigouPaths paths,
                                       Rational delta)
    : paths_(paths), share_(partition.share(self)), delta_(std::move(delta)) {
  check_self(partition, self);
  auto sol = solve_planner_equilibrium<Rational>(partition);
  own_lambda_ = sol.lambdas[self];
  if (delta_ <= 0 || delta_ >= 1) throw EngineError("load increment must lie strictly inside (0,1)");
}

StageAssignment RedemptionStrategy::decide(int) {
  IntervalSet debtors = IntervalSet::empty();
  for (const auto& entry : entries_) debtors = debtors.unite(entry.debtors);

  if (entries_.empty() && load_stages_ == 0) {
    load_ = Rational(0);
    redeeming_ = IntervalSet::empty();
    bottom_measure_ = Rational(1, 2);
    auto rot = rotate_assignment(pointer_, bottom_measure_);
    pointer_ = rot.pointer;
    last_fraction_ = bottom_measure_;
    window_ = rot.window;
    return StageAssignment::split(rot.window, paths_.bottom, paths_.top);
  }

  Rational lane_measure = 1 - debtors.measure();
  Rational target = Rational(1, 2) + load_;
  if (target > lane_measure) target = lane_measure;
  IntervalSet lane = debtors.complement();
  window_ = lane.slice_by_measure(pointer_, target);
  pointer_ = frac1(pointer_ + target);
  redeeming_ = debtors;
  bottom_measure_ = target;
  last_fraction_ = target;
  if (load_stages_ > 0) {
    --load_stages_;
    if (load_stages_ == 0) load_ = Rational(0);
  }
  return StageAssignment::split(window_, paths_.bottom, paths_.top);
}

Rational RedemptionStrategy::debtor_bottom_share(const IntervalSet& debtors) const {
  Rational lane = 1 - debtors.measure();
  if (lane == 0) return Rational(0);
  Rational beta = bottom_measure_ / lane;
  return beta > 1 ? Rational(1) : beta;
}

void RedemptionStrategy::observe(const LocalStageView& view) {
  if (!view.identification) throw EngineError("redemption requires identified defections");
  const Rational f = view.bottom_flow;

  IntervalSet violated = IntervalSet::empty();
  for (const auto& d : view.own_defections) violated = violated.unite(d.subset);

  // Credit: debtors that complied with the top-path assignment repay the
  // bottom-path share they would otherwise have enjoyed.
  if (!redeeming_.is_empty()) {
    Rational unit = debtor_bottom_share(redeeming_) * (1 - f);
    for (auto& entry : entries_) {
      Rational payers = entry.debtors.intersect(redeeming_).subtract(violated).measure();
      entry.remaining -= payers * unit;
    }
    entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                  [](const DebtEntry& e) { return e.remaining <= 0; }),
                   entries_.end());
  }

  // Debt: each identified defection is charged its gain over compliance.
  for (const auto& d : view.own_defections) {
    Rational s_total = d.subset.measure();
    Rational s_bottom = window_.intersect(d.subset).measure();
    Rational s_top = s_total - s_bottom;
    Rational realized_bottom = d.path == paths_.bottom ? s_total : Rational(0);
    Rational counterfactual_flow = f - share_ * (realized_bottom - s_bottom);
    Rational realized_cost = d.path == paths_.bottom ? s_total * f : s_total;
    Rational compliant_cost = s_bottom * counterfactual_flow + s_top;
    Rational gain = compliant_cost - realized_cost;
    if (gain <= 0) continue;

    bool merged = false;
    for (auto& entry : entries_) {
      if (entry.debtors == d.subset) {
        entry.remaining += gain;
        merged = true;
        break;
      }
    }
    if (!merged) entries_.push_back({d.subset, gain});

    load_stages_ += rational_ceil_ll(gain / delta_);
    Rational cap = own_lambda_ > Rational(1, 2) ? own_lambda_ - Rational(1, 2) : Rational(0);
    if (load_ + delta_ <= cap) {
      load_ += delta_;
    } else {
      ++load_stages_;
    }
  }
}

std::unique_ptr<PlannerStrategy> RedemptionStrategy::clone() const {
  return std::make_unique<RedemptionStrategy>(*this);
}

StrategyTrace RedemptionStrategy::trace() const {
  StrategyTrace t{last_fraction_, pointer_, load_stages_, {}};
  t.aux.push_back(load_);
  t.aux.push_back(bottom_measure_);
  auto push_set = [&t](const IntervalSet& s) {
    t.aux.push_back(Rational(static_cast<long long>(s.parts().size())));
    for (const auto& part : s.parts()) {
      t.aux.push_back(part.lo);
      t.aux.push_back(part.hi);
    }
  };
  push_set(redeeming_);
  push_set(window_);
  t.aux.push_back(Rational(static_cast<long long>(entries_.size())));
  for (const auto& entry : entries_) {
    t.aux.push_back(entry.remaining);
    push_set(entry.debtors);
  }
  return t;
}

OneShotDeviationStrategy::OneShotDeviationStrategy(std::unique_ptr<PlannerStrategy> inner,
                                                   int stage, Rational fraction, PigouPaths paths)
    : inner_(std::move(inner)), stage_(stage), fraction_(std::move(fraction)), paths_(paths) {
  if (!inner_) throw EngineError("strategy must not be null");
  if (stage_ < 1) throw EngineError("deviation stage must be at least 1");
  if (fraction_ < 0 || fraction_ > 1) throw EngineError("fractions must lie in [0, 1]");
}

StageAssignment OneShotDeviationStrategy::decide(int stage) {
  if (stage != stage_) return inner_->decide(stage);
  Rational pointer = inner_->trace().pointer;
  (void)inner_->decide(stage);  // keep the inner bookkeeping in step
  auto rot = rotate_assignment(pointer, fraction_);
  return StageAssignment::split(rot.window, paths_.bottom, paths_.top);
}

void OneShotDeviationStrategy::observe(const LocalStageView& view) {
  last_observed_ = view.stage;
  inner_->observe(view);
}

std::unique_ptr<PlannerStrategy> OneShotDeviationStrategy::clone() const {
  auto copy = std::make_unique<OneShotDeviationStrategy>(inner_->clone(), stage_, fraction_, paths_);
  copy->last_observed_ = last_observed_;
  return copy;
}

StrategyTrace OneShotDeviationStrategy::trace() const {
  StrategyTrace t = inner_->trace();
  if (last_observed_ == stage_) t.fraction = fraction_;
  t.aux.push_back(Rational(stage_));
  t.aux.push_back(Rational(last_observed_ >= stage_ ? 1 : 0));
  return t;
}

}  // namespace routing
