#include "mitlgame/pipeline.hpp"

#include <algorithm>

#include "mitlgame/bench.hpp"
#include "mitlgame/error.hpp"

namespace mitlgame {

namespace {

template <class F>
decltype(auto) timed(StageTimer* timer, const std::string& stage, F&& f) {
  if (timer) return timer->run(stage, std::forward<F>(f));
  return f();
}

std::string resolve_spec_text(const std::string& s) {
  for (const auto& b : builtin_specs())
    if (b.name == s) return b.text;
  return s;
}

}  // namespace

TimedBuchiAutomaton automaton_for(const FormulaPtr& f) { return tba_from_fragment(f); }

Problem load_problem(const ModelFile& m, const std::optional<std::string>& spec, unsigned threads, StageTimer* timer) {
  Problem pr;
  const std::optional<std::string> text = spec ? spec : m.spec;
  std::vector<std::string> atoms;
  if (text) {
    pr.spec_text = resolve_spec_text(*text);
    pr.formula = parse_mitl(pr.spec_text, model_vocabulary(m));
    pr.tba = timed(timer, "automaton", [&] { return automaton_for(pr.formula); });
    atoms = pr.tba.propositions;
  } else if (m.tba) {
    pr.tba = tba_from_json(*m.tba, "$.tba");
    atoms = pr.tba.propositions;
  } else {
    throw validation_error("MissingSpec", "give a specification with --spec or in the model file");
  }
  std::vector<std::string> comparison_atoms;
  for (const auto& atom : atoms)
    if (parse_comparison_atom(atom)) comparison_atoms.push_back(atom);
  pr.dsg = timed(timer, "abstraction", [&] { return build_model_dsg(m, comparison_atoms, threads); });
  return pr;
}

std::pair<ProductGame, GlobalGame> build_games(const Dsg& g, const TimedBuchiAutomaton& a, const GdsgOptions& opt,
                                               StageTimer* timer) {
  ProductGame p = timed(timer, "product", [&] { return build_product(g, a); });
  GlobalGame gg = timed(timer, "global", [&] { return build_global(p, g, a, opt); });
  return {std::move(p), std::move(gg)};
}

Synthesis synthesize(const Dsg& g, const TimedBuchiAutomaton& a, const SynthesisOptions& opt, StageTimer* timer) {
  Synthesis out;
  std::tie(out.product, out.global) = build_games(g, a, opt.game, timer);
  const Game& z = out.global.game;
  out.gamecs = timed(timer, "gamec", [&] { return compute_gamecs(z); });
  const std::vector<bool> target =
      opt.vi.target == TargetMode::GamecUnion ? reachability_targets(out.gamecs, z.size())
                                              : reachability_targets(z, TargetMode::Accepting);
  out.vi = timed(timer, "value_iteration", [&] { return value_iteration(z, target, opt.vi); });
  out.value = out.vi.q[z.initial];
  if (opt.extract) {
    out.extraction = timed(timer, "extraction", [&] {
      const auto rows = optimal_rows(z, out.vi.target, out.gamecs, out.vi.q, opt.vi.threads);
      return extract_policy(out.global, out.product, a, rows);
    });
  }
  return out;
}

std::int64_t simulation_horizon(const Formula& f) {
  const auto bound = horizon_bound(f);
  if (!bound) throw validation_error("UnboundedSpec", "simulation needs a specification with bounded intervals");
  std::int64_t h = bound->floor();
  if (Rational(h) != *bound) ++h;
  return h + 1;
}

}  // namespace mitlgame
