#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mitlgame/dsg.hpp"
#include "mitlgame/gamec.hpp"
#include "mitlgame/gdsg.hpp"
#include "mitlgame/io.hpp"
#include "mitlgame/mitl.hpp"
#include "mitlgame/product.hpp"
#include "mitlgame/solver.hpp"
#include "mitlgame/tba.hpp"

namespace mitlgame {

// Wall-clock seconds per named stage, in execution order.
class StageTimer {
 public:
  template <class F>
  decltype(auto) run(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      StageTimer* t;
      std::string stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        t->stages_.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
    } rec{this, stage, start};
    return f();
  }
  const std::vector<std::pair<std::string, double>>& stages() const { return stages_; }

 private:
  std::vector<std::pair<std::string, double>> stages_;
};

// The game and automaton a model plus specification describe.
struct Problem {
  std::string spec_text;    // empty when the automaton came from the model file
  FormulaPtr formula;       // null when the automaton came from the model file
  Dsg dsg;
  TimedBuchiAutomaton tba;
};

// Resolves the MITL formula (a built-in name such as "phi1" or MITL text;
// `spec` overrides the model's own), builds the automaton and the game.
// Throws Error(Validation, "MissingSpec") when neither a spec nor an automaton is given.
Problem load_problem(const ModelFile& m, const std::optional<std::string>& spec, unsigned threads,
                     StageTimer* timer = nullptr);

// Automaton for a specification: the bounded-fragment construction.
TimedBuchiAutomaton automaton_for(const FormulaPtr& f);

struct Synthesis {
  ProductGame product;
  GlobalGame global;
  GamecSet gamecs;
  ViResult vi;
  Extraction extraction;
  double value = 0.0;       // value at the initial global state
};

struct SynthesisOptions {
  GdsgOptions game;
  ViOptions vi;
  bool extract = true;
};

Synthesis synthesize(const Dsg& g, const TimedBuchiAutomaton& a, const SynthesisOptions& opt,
                     StageTimer* timer = nullptr);

// Product and global game only.
std::pair<ProductGame, GlobalGame> build_games(const Dsg& g, const TimedBuchiAutomaton& a, const GdsgOptions& opt,
                                               StageTimer* timer = nullptr);

// Ticks a rollout must cover so every bounded spec gets a definite verdict:
// ceil(horizon bound) + 1. Throws Error(Validation, "UnboundedSpec") for an unbounded spec.
std::int64_t simulation_horizon(const Formula& f);

}  // namespace mitlgame
