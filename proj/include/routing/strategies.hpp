#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "routing/game.hpp"

namespace routing {

struct RotatedWindow {
  IntervalSet window;
  Rational pointer;  // position after taking the window
};

/// The next `fraction` of cars starting at `pointer`, wrapping modulo 1.
/// Rotating the window across stages spreads an uneven split fairly: over
/// T stages at constant fraction p every car rides the priced route pT
/// stage-measures in total, and any two cars' counts differ by at most 1.
RotatedWindow rotate_assignment(const Rational& pointer, const Rational& fraction);

/// Emits a fixed bottom fraction every stage, rotated.
class StaticStrategy : public PlannerStrategy {
 public:
  StaticStrategy(Rational fraction, PigouPaths paths);

  StageAssignment decide(int stage) override;
  void observe(const LocalStageView& view) override;
  std::unique_ptr<PlannerStrategy> clone() const override;
  StrategyTrace trace() const override;
  std::string kind() const override { return "static"; }

 private:
  Rational fraction_;
  PigouPaths paths_;
  Rational pointer_ = Rational(0);
};

/// The optimal-with-deterrence rule: split 50/50 while the slate is clean;
/// after observing bottom flow above the prescription, play the one-shot
/// equilibrium fraction for N+1 stages, stacking per detected stage.
/// N is the minimal count with N(F - 3/4) > 1/2, which requires F > 3/4;
/// profiles below that regime must supply punishment_override (used by the
/// impossibility studies, which need the rule outside its valid regime).
class PunishmentStrategy : public PlannerStrategy {
 public:
  PunishmentStrategy(const Partition& partition, int self, PigouPaths paths,
                     std::optional<long long> punishment_override = std::nullopt,
                     Rational detect_eps = Rational(0));

  StageAssignment decide(int stage) override;
  void observe(const LocalStageView& view) override;
  std::unique_ptr<PlannerStrategy> clone() const override;
  StrategyTrace trace() const override;
  std::string kind() const override { return "punishment"; }
  bool counter_saturates() const override { return true; }

  long long punishment_length() const { return length_; }
  const Rational& equilibrium_fraction() const { return own_lambda_; }
  const Rational& equilibrium_flow() const { return flow_; }

 private:
  PigouPaths paths_;
  Rational own_lambda_;
  Rational flow_;
  long long length_;
  Rational eps_;
  Rational pointer_ = Rational(0);
  Rational last_fraction_ = Rational(0);
  Rational prescribed_ = Rational(1, 2);
  long long counter_ = 0;
};

/// Boundary variant for equilibria sitting exactly at flow 3/4: the
/// punishment length is chosen per detection from the observed excess,
/// requiring N(observed - prescribed) > 1/2 and N(1 - lambda_max)/4 > 1/2.
/// Valid only when no planner sends all of its traffic down (lambda_max < 1).
class EdgeCasePunishmentStrategy : public PlannerStrategy {
 public:
  EdgeCasePunishmentStrategy(const Partition& partition, int self, PigouPaths paths,
                             Rational detect_eps = Rational(0));

  StageAssignment decide(int stage) override;
  void observe(const LocalStageView& view) override;
  std::unique_ptr<PlannerStrategy> clone() const override;
  StrategyTrace trace() const override;
  std::string kind() const override { return "edge_case"; }
  bool counter_saturates() const override { return true; }

 private:
  PigouPaths paths_;
  Rational own_lambda_;
  Rational flow_;
  Rational lambda_max_;
  Rational eps_;
  Rational pointer_ = Rational(0);
  Rational last_fraction_ = Rational(0);
  Rational prescribed_ = Rational(1, 2);
  long long counter_ = 0;
};

/// Best-responds each stage to the bottom flow the others produced last
/// stage (realized flow minus its own contribution). First stage plays a
/// configurable fraction, default 1/2.
class MyopicStrategy : public PlannerStrategy {
 public:
  MyopicStrategy(const Rational& own_share, PigouPaths paths,
                 Rational initial_fraction = Rational(1, 2));

  StageAssignment decide(int stage) override;
  void observe(const LocalStageView& view) override;
  std::unique_ptr<PlannerStrategy> clone() const override;
  StrategyTrace trace() const override;
  std::string kind() const override { return "myopic"; }

 private:
  Rational share_;
  PigouPaths paths_;
  Rational initial_;
  Rational pointer_ = Rational(0);
  Rational last_fraction_ = Rational(0);
  Rational others_flow_ = Rational(0);
  bool observed_ = false;
};

/// Identification-based variant: instead of equilibrium rounds, detected
/// defectors accrue a debt equal to their measured gain and are assigned
/// the top path until forgone gains repay it, while the planner adds a
/// slight bottom-load increase (delta per detection, capped at its
/// equilibrium fraction; blocked increments extend the load phase). Once
/// every debt clears, routing returns to 50/50. Requires the engine to
/// identify defecting car subsets.
class RedemptionStrategy : public PlannerStrategy {
 public:
  RedemptionStrategy(const Partition& partition, int self, PigouPaths paths,
                     Rational delta = Rational(1, 100));

  StageAssignment decide(int stage) override;
  void observe(const LocalStageView& view) override;
  std::unique_ptr<PlannerStrategy> clone() const override;
  StrategyTrace trace() const override;
  std::string kind() const override { return "redemption"; }

  bool ledger_empty() const { return entries_.empty(); }

 private:
  struct DebtEntry {
    IntervalSet debtors;
    Rational remaining;
  };

  Rational debtor_bottom_share(const IntervalSet& debtors) const;

  PigouPaths paths_;
  Rational share_;
  Rational own_lambda_;
  Rational delta_;
  Rational pointer_ = Rational(0);
  Rational last_fraction_ = Rational(0);
  Rational load_ = Rational(0);         // current extra bottom load
  long long load_stages_ = 0;           // scheduled load-increase stages left
  std::vector<DebtEntry> entries_;
  IntervalSet redeeming_ = IntervalSet::empty();  // debtors sent top this stage
  IntervalSet window_ = IntervalSet::empty();     // bottom window decided this stage
  Rational bottom_measure_ = Rational(0);         // bottom window size this stage
};

/// Plays `fraction` at one stage and its inner strategy everywhere else;
/// the inner machine keeps observing normally, so after the deviation the
/// planner conforms (including joining any punishment it triggered).
class OneShotDeviationStrategy : public PlannerStrategy {
 public:
  OneShotDeviationStrategy(std::unique_ptr<PlannerStrategy> inner, int stage, Rational fraction,
                           PigouPaths paths);

  StageAssignment decide(int stage) override;
  void observe(const LocalStageView& view) override;
  std::unique_ptr<PlannerStrategy> clone() const override;
  StrategyTrace trace() const override;
  std::string kind() const override { return "one_shot"; }
  bool counter_saturates() const override { return inner_->counter_saturates(); }

 private:
  std::unique_ptr<PlannerStrategy> inner_;
  int stage_;
  Rational fraction_;
  PigouPaths paths_;
  int last_observed_ = 0;
};

}  // namespace routing
