#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace mitlgame {

using Valuation = std::vector<std::int64_t>;

enum class Hypothesis { H0, H1 };

// H0 iff the infinity-norm distance between estimate and observation is at
// most `threshold`. A missing threshold disables detection.
Hypothesis detect(const Valuation& estimate, const Valuation& observed, std::optional<double> threshold);

// lambda + delta with `resets` zeroed, every component saturated at cap.
Valuation advance_estimate(const Valuation& lambda, std::int64_t delta, const std::vector<std::size_t>& resets,
                           std::int64_t cap);

// Distribution over local defender actions of the DSG state.
using ActionDistribution = std::vector<std::pair<std::size_t, double>>;

// Finite state controller. Memory y = (lambda, detected). Under H0 the row is
// read from mu0[(lambda, s, q, observed v)], under H1 from mu1[(lambda, s, q)].
// The memory update is deterministic: after the transition to s' the estimate
// advances by duration_estimate[(s, c, s')] with the automaton's resets.
struct FiniteStateController {
  using Key0 = std::tuple<Valuation, std::size_t, std::size_t, Valuation>;
  using Key1 = std::tuple<Valuation, std::size_t, std::size_t>;

  std::vector<std::string> clocks;
  std::int64_t lambda_cap = 0;
  std::optional<double> threshold;
  std::map<Key0, ActionDistribution> mu0;
  std::map<Key1, ActionDistribution> mu1;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::int64_t> duration_estimate;

  // Row for the current memory. Throws Error(Runtime, "IncompletePolicy") when
  // the row is missing; `observed` is ignored under H1.
  const ActionDistribution& act(const Valuation& lambda, bool detected, std::size_t s, std::size_t q,
                                const Valuation& observed) const;
  // Checks every row is a distribution over [0, actions(s)); throws Error(Validation).
  template <class ActionCount>
  void check(ActionCount actions) const;
};

// Throws Error(Validation) unless the row is a distribution over [0, nactions).
void check_distribution(const ActionDistribution& row, std::size_t nactions, const std::string& where);

template <class ActionCount>
void FiniteStateController::check(ActionCount actions) const {
  for (const auto& [k, row] : mu0) check_distribution(row, actions(std::get<1>(k)), "mu0");
  for (const auto& [k, row] : mu1) check_distribution(row, actions(std::get<1>(k)), "mu1");
}

}  // namespace mitlgame
