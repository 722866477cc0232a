#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mitlgame {

struct Outcome {
  std::size_t to = 0;
  double p = 0.0;
  std::vector<std::pair<std::int64_t, double>> durations;  // (ticks, probability), ascending ticks
};

// Durational stochastic game. Action indices at a state are local: defender
// choice c in [0, defender_of[s].size()) names global action defender_of[s][c].
struct Dsg {
  std::vector<std::string> states;
  std::size_t initial = 0;
  std::vector<std::string> propositions;
  std::vector<std::uint64_t> labels;
  std::vector<std::string> defender_actions, adversary_actions;
  std::vector<std::vector<std::size_t>> defender_of, adversary_of;
  std::vector<std::string> clocks;
  // kernel[s][c * adversary_of[s].size() + a]
  std::vector<std::vector<std::vector<Outcome>>> kernel;

  std::size_t size() const { return states.size(); }
  std::size_t nc(std::size_t s) const { return defender_of[s].size(); }
  std::size_t na(std::size_t s) const { return adversary_of[s].size(); }
  const std::vector<Outcome>& row(std::size_t s, std::size_t c, std::size_t a) const {
    return kernel[s][c * na(s) + a];
  }
  std::vector<Outcome>& row(std::size_t s, std::size_t c, std::size_t a) { return kernel[s][c * na(s) + a]; }

  // Sorted set of all durations with positive mass.
  std::vector<std::int64_t> duration_set() const;
  std::size_t proposition_index(const std::string& name) const;  // npos-like size() when absent
};

struct Violation {
  std::string code;
  std::string message;
};

// Every violated structural invariant; empty means valid.
std::vector<Violation> validate(const Dsg& g);
// Throws Error(Validation) carrying the first violation.
void require_valid(const Dsg& g);

}  // namespace mitlgame
