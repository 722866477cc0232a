#include "mitlgame/dsg.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mitlgame/error.hpp"

namespace mitlgame {

namespace {
constexpr double kTol = 1e-9;
}

std::vector<std::int64_t> Dsg::duration_set() const {
  std::set<std::int64_t> d;
  for (const auto& rows : kernel)
    for (const auto& row : rows)
      for (const auto& o : row)
        for (const auto& [ticks, p] : o.durations)
          if (p > 0) d.insert(ticks);
  return {d.begin(), d.end()};
}

std::size_t Dsg::proposition_index(const std::string& name) const {
  auto it = std::find(propositions.begin(), propositions.end(), name);
  return static_cast<std::size_t>(it - propositions.begin());
}

std::vector<Violation> validate(const Dsg& g) {
  std::vector<Violation> out;
  auto add = [&](const char* code, std::string msg) { out.push_back({code, std::move(msg)}); };
  const std::size_t n = g.size();
  if (n == 0) {
    add("EmptyGame", "no states");
    return out;
  }
  if (g.initial >= n) add("BadInitialState", "initial state index out of range");
  if (g.propositions.size() > 64) add("TooManyPropositions", "at most 64 propositions");
  if (g.labels.size() != n || g.defender_of.size() != n || g.adversary_of.size() != n || g.kernel.size() != n) {
    add("ShapeMismatch", "per-state tables do not match the state count");
    return out;
  }
  const std::uint64_t label_mask =
      g.propositions.size() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << g.propositions.size()) - 1;
  for (std::size_t s = 0; s < n; ++s) {
    const std::string& name = g.states[s];
    if (g.labels[s] & ~label_mask) add("BadLabel", name + ": label uses undeclared propositions");
    if (g.defender_of[s].empty()) add("EmptyActionSet", name + ": no defender actions");
    if (g.adversary_of[s].empty()) add("EmptyActionSet", name + ": no adversary actions");
    for (auto c : g.defender_of[s])
      if (c >= g.defender_actions.size()) add("UnknownAction", name + ": defender action index out of range");
    for (auto a : g.adversary_of[s])
      if (a >= g.adversary_actions.size()) add("UnknownAction", name + ": adversary action index out of range");
    if (g.kernel[s].size() != g.nc(s) * g.na(s)) {
      add("ShapeMismatch", name + ": kernel rows do not match the action sets");
      continue;
    }
    for (std::size_t c = 0; c < g.nc(s); ++c)
      for (std::size_t a = 0; a < g.na(s); ++a) {
        const std::string where = "(" + name + ", " + g.defender_actions[g.defender_of[s][c]] + ", " +
                                  g.adversary_actions[g.adversary_of[s][a]] + ")";
        double total = 0;
        for (const auto& o : g.row(s, c, a)) {
          if (o.to >= n) {
            add("UnknownState", where + ": successor index out of range");
            continue;
          }
          if (!(o.p >= 0) || !std::isfinite(o.p)) add("NegativeProbability", where + ": invalid probability");
          total += o.p;
          double dsum = 0;
          for (const auto& [ticks, p] : o.durations) {
            if (ticks <= 0) add("NonPositiveDuration", where + ": duration " + std::to_string(ticks));
            if (!(p >= 0)) add("NegativeProbability", where + ": invalid duration probability");
            dsum += p;
          }
          if (o.p > 0 && o.durations.empty())
            add("MissingDurationRow", where + " -> " + g.states[o.to] + ": no duration distribution");
          else if (o.p == 0 && !o.durations.empty())
            add("OrphanDurationRow", where + " -> " + g.states[o.to] + ": durations on a zero-probability successor");
          else if (o.p > 0 && std::abs(dsum - 1.0) > kTol)
            add("StochasticityViolation", where + " -> " + g.states[o.to] + ": durations sum to " +
                                              std::to_string(dsum));
        }
        if (std::abs(total - 1.0) > kTol)
          add("StochasticityViolation", where + ": successor probabilities sum to " + std::to_string(total));
      }
  }
  return out;
}

void require_valid(const Dsg& g) {
  auto report = validate(g);
  if (!report.empty()) throw validation_error(report.front().code, report.front().message);
}

}  // namespace mitlgame
