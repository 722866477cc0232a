#include "mitlgame/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/beta.hpp>

#include "mitlgame/error.hpp"
#include "mitlgame/parallel.hpp"

namespace mitlgame {

namespace {

std::size_t sample_index(const std::vector<double>& weights, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double total = 0;
  for (double w : weights) total += w;
  u *= total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  // Rounding left u at the top; take the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0) return i;
  return 0;
}

}  // namespace

ActionDistribution ControllerPolicy::row(const DefenderView& view) const {
  return fsc_.act(view.lambda, view.detected, view.s, view.q, view.observed);
}

std::size_t PassiveAdversary::column(const AdversaryView& view, const GlobalGame& gg) const {
  const auto& cols = gg.columns[view.global];
  for (std::size_t c = 0; c < cols.size(); ++c)
    if (cols[c].ua == action_ && (cols[c].observed == view.v || cols[c].observed.empty())) return c;
  throw runtime_error("NoPassiveColumn", "global state " + gg.game.names[view.global] + " has no passive column");
}

Simulator::Simulator(const Dsg& g, const TimedBuchiAutomaton& a, const ProductGame& p, const GlobalGame& gg)
    : g_(g), a_(a), p_(p), gg_(gg), map_(alphabet_map(g, a)) {
  for (std::size_t i = 0; i < p.states.size(); ++i) product_index_.emplace(p.states[i], i);
  for (std::size_t i = 0; i < gg.states.size(); ++i) global_index_.emplace(gg.states[i], i);
}

Rollout Simulator::rollout(const DefenderPolicy& defender, const AdversaryPolicy& adversary, std::int64_t horizon,
                           std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Rollout out;
  out.word.propositions = g_.propositions;
  const std::size_t nclk = a_.clocks.size();
  std::size_t s = g_.initial;
  std::size_t pidx = p_.initial;
  Valuation lambda(nclk, 0);
  bool detected = false;
  std::int64_t time = 0;
  auto global_of = [&](std::size_t pi, const Valuation& lam, bool det) {
    const bool viol = p_.states[pi].violation();
    auto it = global_index_.find(GlobalState{pi, viol ? Valuation(nclk, 0) : lam, viol ? false : det});
    if (it == global_index_.end())
      throw runtime_error("StateOutsideGame", "rollout reached a state the global game does not contain");
    return it->second;
  };

  for (std::int64_t tick = 0; time < horizon; ++tick) {
    const ProductState ps = p_.states[pidx];
    RolloutStep step;
    step.tick = tick;
    step.true_time = time;
    step.observed_time = time;
    step.dsg_state = s;
    step.q = ps.q;
    step.v = ps.v;
    step.lambda = lambda;
    step.label = g_.labels[s];
    std::size_t uc = 0, ua = 0;
    if (!ps.violation()) {
      std::size_t gi = global_of(pidx, lambda, detected);
      AdversaryView av{tick, gi, s, ps.q, ps.v, lambda, detected, &defender};
      std::size_t c = adversary.column(av, gg_);
      if (c >= gg_.columns[gi].size()) throw runtime_error("BadColumn", "adversary column out of range");
      if (gg_.columns[gi][c].detect) {
        // The shown valuation trips detection: the hypothesis latches and the
        // adversary chooses again at the H1 twin, with no time passing.
        step.manipulated = true;
        detected = true;
        gi = global_of(pidx, lambda, true);
        av.global = gi;
        av.detected = true;
        c = adversary.column(av, gg_);
        if (c >= gg_.columns[gi].size()) throw runtime_error("BadColumn", "adversary column out of range");
      }
      const AdversaryColumn& col = gg_.columns[gi][c];
      const Valuation observed = detected ? ps.v : col.observed;
      if (!detected && observed != ps.v) step.manipulated = true;
      if (!observed.empty() && !ps.v.empty()) step.observed_time = time + (observed[0] - ps.v[0]);
      ua = col.ua;
      const ActionDistribution row = defender.row(DefenderView{tick, s, ps.q, lambda, detected, observed});
      std::vector<double> weights(g_.nc(s), 0.0);
      for (const auto& [r, pr] : row) {
        if (r >= weights.size()) throw runtime_error("IncompletePolicy", "row names an action outside the state");
        weights[r] += pr;
      }
      uc = sample_index(weights, rng);
    }
    step.hypothesis = detected ? Hypothesis::H1 : Hypothesis::H0;
    step.uc = g_.defender_of[s][uc];
    step.ua = g_.adversary_of[s][ua];

    const auto& outcomes = g_.row(s, uc, ua);
    std::vector<double> w;
    for (const auto& o : outcomes) w.push_back(o.p);
    const Outcome& o = outcomes[sample_index(w, rng)];
    std::vector<double> dw;
    for (const auto& d : o.durations) dw.push_back(d.second);
    const std::int64_t delta = o.durations[sample_index(dw, rng)].first;
    const std::size_t s2 = o.to;

    std::size_t next_p = pidx;
    std::vector<std::size_t> resets;
    if (!ps.violation()) {
      auto moves = step_quantized(ps.q, ps.v, automaton_letter(g_.labels[s2], map_), delta, a_);
      if (moves.empty()) {
        next_p = p_.violation;
        out.automaton_violated = true;
      } else {
        auto it = product_index_.find(ProductState{static_cast<std::int64_t>(s2), moves.front().q, moves.front().v});
        if (it == product_index_.end())
          throw runtime_error("StateOutsideGame", "rollout reached a product state outside the product");
        next_p = it->second;
        resets = a_.edges[moves.front().edge].resets;
      }
      auto est = gg_.duration_estimate.find({s, uc, s2});
      const std::int64_t dhat = est != gg_.duration_estimate.end() ? est->second : expected_duration(g_, s, uc, s2);
      lambda = advance_estimate(lambda, dhat, resets, gg_.lambda_cap);
    }
    out.steps.push_back(std::move(step));
    time += delta;
    s = s2;
    pidx = next_p;
    out.word.letters.push_back(g_.labels[s2]);
    out.word.times.emplace_back(time);
  }
  out.word.horizon = Rational(time);
  return out;
}

std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double alpha = 0.05;
  const auto kd = static_cast<double>(k), nd = static_cast<double>(n);
  double lo = 0.0, hi = 1.0;
  if (k > 0) lo = boost::math::quantile(boost::math::beta_distribution<double>(kd, nd - kd + 1), alpha / 2);
  if (k < n) hi = boost::math::quantile(boost::math::beta_distribution<double>(kd + 1, nd - kd), 1 - alpha / 2);
  return {lo, hi};
}

SatisfactionEstimate estimate_satisfaction(const Simulator& sim, const DefenderPolicy& defender,
                                           const AdversaryPolicy& adversary, const FormulaPtr& spec,
                                           const EstimateOptions& opt) {
  if (opt.rollouts == 0) throw validation_error("BadRolloutCount", "at least one rollout is required");
  std::vector<Verdict> verdicts(opt.rollouts);
  parallel_for(opt.rollouts, opt.threads, [&](std::size_t i) {
    Rollout r = sim.rollout(defender, adversary, opt.horizon, derive_seed(opt.seed, i));
    verdicts[i] = evaluate(*spec, r.word, Rational(0));
  });
  SatisfactionEstimate est;
  est.n = opt.rollouts;
  for (auto v : verdicts) {
    if (v == Verdict::Satisfied) ++est.satisfied;
    else if (v == Verdict::Violated) ++est.violated;
    else ++est.inconclusive;
  }
  if (est.inconclusive > 0)
    throw runtime_error("HorizonTooShort", std::to_string(est.inconclusive) + " of " + std::to_string(est.n) +
                                               " rollouts ended without a definite verdict");
  const double n = static_cast<double>(est.n);
  est.p_hat = static_cast<double>(est.satisfied) / n;
  est.half_width = 1.96 * std::sqrt(est.p_hat * (1 - est.p_hat) / n);
  if (opt.exact_interval) {
    std::tie(est.lower, est.upper) = clopper_pearson(est.satisfied, est.n);
  } else {
    est.lower = std::max(0.0, est.p_hat - est.half_width);
    est.upper = std::min(1.0, est.p_hat + est.half_width);
  }
  return est;
}

}  // namespace mitlgame
