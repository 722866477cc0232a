#include "mitlgame/fsc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "mitlgame/error.hpp"

namespace mitlgame {

Hypothesis detect(const Valuation& estimate, const Valuation& observed, std::optional<double> threshold) {
  if (estimate.size() != observed.size())
    throw validation_error("DimensionMismatch", "estimate and observation have different clock counts");
  if (!threshold) return Hypothesis::H0;
  std::int64_t dist = 0;
  for (std::size_t i = 0; i < estimate.size(); ++i) dist = std::max<std::int64_t>(dist, std::llabs(estimate[i] - observed[i]));
  return static_cast<double>(dist) <= *threshold ? Hypothesis::H0 : Hypothesis::H1;
}

Valuation advance_estimate(const Valuation& lambda, std::int64_t delta, const std::vector<std::size_t>& resets,
                           std::int64_t cap) {
  Valuation out = lambda;
  for (auto& x : out) x = std::min(cap, x + delta);
  for (auto r : resets) out.at(r) = 0;
  return out;
}

const ActionDistribution& FiniteStateController::act(const Valuation& lambda, bool detected, std::size_t s,
                                                     std::size_t q, const Valuation& observed) const {
  if (detected) {
    auto it = mu1.find(Key1{lambda, s, q});
    if (it == mu1.end())
      throw runtime_error("IncompletePolicy", "no mu1 row for DSG state " + std::to_string(s) + ", automaton state " +
                                                  std::to_string(q));
    return it->second;
  }
  auto it = mu0.find(Key0{lambda, s, q, observed});
  if (it == mu0.end())
    throw runtime_error("IncompletePolicy", "no mu0 row for DSG state " + std::to_string(s) + ", automaton state " +
                                                std::to_string(q));
  return it->second;
}

void check_distribution(const ActionDistribution& row, std::size_t nactions, const std::string& where) {
  double total = 0;
  for (const auto& [c, p] : row) {
    if (c >= nactions) throw validation_error("BadPolicy", where + ": action outside the state's defender actions");
    if (!(p >= 0)) throw validation_error("BadPolicy", where + ": negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw validation_error("BadPolicy", where + ": row does not sum to 1");
}

}  // namespace mitlgame
