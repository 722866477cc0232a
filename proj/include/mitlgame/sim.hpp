#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "mitlgame/dsg.hpp"
#include "mitlgame/fsc.hpp"
#include "mitlgame/gdsg.hpp"
#include "mitlgame/mitl.hpp"
#include "mitlgame/product.hpp"
#include "mitlgame/solver.hpp"
#include "mitlgame/tba.hpp"

namespace mitlgame {

// What the defender sees before acting: the DSG state, its own memory and the
// possibly manipulated valuation. True time is not part of it.
struct DefenderView {
  std::int64_t tick = 0;
  std::size_t s = 0, q = 0;
  Valuation lambda;
  bool detected = false;
  Valuation observed;
};

class DefenderPolicy {
 public:
  virtual ~DefenderPolicy() = default;
  virtual ActionDistribution row(const DefenderView& view) const = 0;
};

class ControllerPolicy : public DefenderPolicy {
 public:
  explicit ControllerPolicy(const FiniteStateController& fsc) : fsc_(fsc) {}
  ActionDistribution row(const DefenderView& view) const override;

 private:
  const FiniteStateController& fsc_;
};

class FunctionPolicy : public DefenderPolicy {
 public:
  explicit FunctionPolicy(std::function<ActionDistribution(const DefenderView&)> fn) : fn_(std::move(fn)) {}
  ActionDistribution row(const DefenderView& view) const override { return fn_(view); }

 private:
  std::function<ActionDistribution(const DefenderView&)> fn_;
};

// The adversary sees everything: the global state, true valuation and the
// defender's committed policy.
struct AdversaryView {
  std::int64_t tick = 0;
  std::size_t global = 0;
  std::size_t s = 0, q = 0;
  Valuation v, lambda;
  bool detected = false;
  const DefenderPolicy* defender = nullptr;
};

class AdversaryPolicy {
 public:
  virtual ~AdversaryPolicy() = default;
  // Column of the global state to play.
  virtual std::size_t column(const AdversaryView& view, const GlobalGame& gg) const = 0;
};

// Plays adversary action `action` and shows the true valuation.
class PassiveAdversary : public AdversaryPolicy {
 public:
  explicit PassiveAdversary(std::size_t action = 0) : action_(action) {}
  std::size_t column(const AdversaryView& view, const GlobalGame& gg) const override;

 private:
  std::size_t action_;
};

class TableAdversary : public AdversaryPolicy {
 public:
  explicit TableAdversary(ColumnPolicy columns) : columns_(std::move(columns)) {}
  std::size_t column(const AdversaryView& view, const GlobalGame&) const override { return columns_.at(view.global); }

 private:
  ColumnPolicy columns_;
};

class FunctionAdversary : public AdversaryPolicy {
 public:
  explicit FunctionAdversary(std::function<std::size_t(const AdversaryView&, const GlobalGame&)> fn)
      : fn_(std::move(fn)) {}
  std::size_t column(const AdversaryView& view, const GlobalGame& gg) const override { return fn_(view, gg); }

 private:
  std::function<std::size_t(const AdversaryView&, const GlobalGame&)> fn_;
};

struct RolloutStep {
  std::int64_t tick = 0;
  std::int64_t true_time = 0;      // before the transition
  std::int64_t observed_time = 0;  // true time shifted by the manipulation shown to the defender
  std::size_t dsg_state = 0;
  std::size_t q = 0;
  Valuation v, lambda;
  bool manipulated = false;        // observation differs from the true valuation
  std::size_t uc = 0, ua = 0;      // global action indices
  Hypothesis hypothesis = Hypothesis::H0;
  std::uint64_t label = 0;         // label of the state left
};

struct Rollout {
  std::vector<RolloutStep> steps;
  TimedWord word;             // labels of entered states at their true arrival times
  bool automaton_violated = false;
};

// Holds the model and the lookup from (s, q, v, lambda, detected) to global states.
class Simulator {
 public:
  Simulator(const Dsg& g, const TimedBuchiAutomaton& a, const ProductGame& p, const GlobalGame& gg);

  // Plays until true time reaches `horizon` ticks. Deterministic given seed.
  // Once the automaton has rejected, both players fall back to local action 0
  // so the trajectory can still be recorded.
  Rollout rollout(const DefenderPolicy& defender, const AdversaryPolicy& adversary, std::int64_t horizon,
                  std::uint64_t seed) const;

  const GlobalGame& global() const { return gg_; }

 private:
  const Dsg& g_;
  const TimedBuchiAutomaton& a_;
  const ProductGame& p_;
  const GlobalGame& gg_;
  std::vector<std::size_t> map_;
  std::map<ProductState, std::size_t> product_index_;
  std::map<GlobalState, std::size_t> global_index_;
};

struct SatisfactionEstimate {
  std::size_t n = 0, satisfied = 0, violated = 0, inconclusive = 0;
  double p_hat = 0.0;
  double half_width = 0.0;  // normal approximation, 1.96 sigma
  double lower = 0.0, upper = 1.0;  // interval reported (normal or Clopper-Pearson)
};

struct EstimateOptions {
  std::size_t rollouts = 10000;
  std::int64_t horizon = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool exact_interval = false;  // Clopper-Pearson 95% instead of the normal interval
};

// Rollout i uses derive_seed(seed, i). Throws Error(Runtime, "HorizonTooShort")
// when any verdict is inconclusive.
SatisfactionEstimate estimate_satisfaction(const Simulator& sim, const DefenderPolicy& defender,
                                           const AdversaryPolicy& adversary, const FormulaPtr& spec,
                                           const EstimateOptions& opt);

// Two-sided 95% Clopper-Pearson interval for k successes in n trials.
std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n);

}  // namespace mitlgame
