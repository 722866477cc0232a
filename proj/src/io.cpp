#include "mitlgame/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mitlgame/error.hpp"

namespace mitlgame {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw validation_error("SchemaError", path + ": " + msg);
}

void allow_keys(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) fail(path + "." + k, "unknown field");
  }
}

const Json& need(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail(path + "." + key, "missing field");
  return j.at(key);
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double as_number(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return Rational::parse(j.get<std::string>()).to_double();
    } catch (const Error&) {
      fail(path, "malformed number '" + j.get<std::string>() + "'");
    }
  }
  fail(path, "expected a number");
}

std::int64_t as_int(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
  }
  fail(path, "expected an integer");
}

std::uint64_t as_uint(const Json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const std::int64_t v = as_int(j, path);
  if (v < 0) fail(path, "expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::vector<std::string> as_strings(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> as_numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<double>> as_matrix(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_numbers(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> as_sizes(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_uint(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name, const std::string& path,
                     const char* what) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(path, std::string("unknown ") + what + " '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

void require_unique(const std::vector<std::string>& names, const std::string& path) {
  std::set<std::string> seen;
  for (const auto& n : names)
    if (!seen.insert(n).second) fail(path, "duplicate name '" + n + "'");
}

Json valuation_json(const Valuation& v) {
  Json a = Json::array();
  for (auto x : v) a.push_back(x);
  return a;
}

Valuation valuation_from(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  Valuation v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

InputAction input_action(const Json& j, const std::string& path) {
  allow_keys(j, path, {"name", "lo", "hi"});
  InputAction a;
  a.name = as_string(need(j, "name", path), path + ".name");
  a.lo = as_numbers(need(j, "lo", path), path + ".lo");
  a.hi = j.contains("hi") ? as_numbers(j.at("hi"), path + ".hi") : a.lo;
  if (a.lo.size() != a.hi.size()) fail(path, "lo and hi differ in length");
  for (std::size_t i = 0; i < a.lo.size(); ++i)
    if (a.lo[i] > a.hi[i]) fail(path, "lo exceeds hi");
  return a;
}

void apply_traffic_overrides(TrafficConfig& c, const Json& j, const std::string& path) {
  allow_keys(j, path, {"capacity", "flow", "arrival_mean", "turn", "supply", "intersections", "cells", "initial",
                       "horizon", "samples", "attack"});
  if (j.contains("capacity")) c.capacity = as_numbers(j["capacity"], path + ".capacity");
  if (j.contains("flow")) c.flow = as_numbers(j["flow"], path + ".flow");
  if (j.contains("arrival_mean")) c.arrival_mean = as_numbers(j["arrival_mean"], path + ".arrival_mean");
  if (j.contains("supply")) c.supply = as_number(j["supply"], path + ".supply");
  if (j.contains("cells")) c.cells = as_sizes(j["cells"], path + ".cells");
  if (j.contains("initial")) c.initial = as_numbers(j["initial"], path + ".initial");
  if (j.contains("horizon")) c.horizon = as_int(j["horizon"], path + ".horizon");
  if (j.contains("samples")) c.samples = as_uint(j["samples"], path + ".samples");
  if (j.contains("attack")) {
    const std::string law = as_string(j["attack"], path + ".attack");
    if (law == "toggle") c.attack = AttackLaw::Toggle;
    else if (law == "block") c.attack = AttackLaw::Block;
    else fail(path + ".attack", "expected 'toggle' or 'block'");
  }
  if (j.contains("turn")) {
    const Json& t = j["turn"];
    if (!t.is_array()) fail(path + ".turn", "expected an array");
    c.turn.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string p = path + ".turn[" + std::to_string(i) + "]";
      allow_keys(t[i], p, {"from", "to", "ratio"});
      const auto from = as_uint(need(t[i], "from", p), p + ".from"), to = as_uint(need(t[i], "to", p), p + ".to");
      if (from == 0 || to == 0) fail(p, "links are numbered from 1");
      c.turn[{from - 1, to - 1}] = as_number(need(t[i], "ratio", p), p + ".ratio");
    }
  }
  if (j.contains("intersections")) {
    const Json& in = j["intersections"];
    if (!in.is_array()) fail(path + ".intersections", "expected an array");
    c.intersections.clear();
    for (std::size_t n = 0; n < in.size(); ++n) {
      const std::string p = path + ".intersections[" + std::to_string(n) + "]";
      if (!in[n].is_array()) fail(p, "expected an array of link subsets");
      std::vector<std::vector<std::size_t>> subsets;
      for (std::size_t k = 0; k < in[n].size(); ++k) {
        auto links = as_sizes(in[n][k], p + "[" + std::to_string(k) + "]");
        for (auto& l : links) {
          if (l == 0) fail(p, "links are numbered from 1");
          l -= 1;
        }
        subsets.push_back(std::move(links));
      }
      c.intersections.push_back(std::move(subsets));
    }
  }
  check(c);
}

void apply_twotank_overrides(TwoTankConfig& c, const Json& j, const std::string& path) {
  allow_keys(j, path, {"A", "B", "control_levels", "adversary_levels", "noise_variance", "lo", "hi", "cells",
                       "initial", "samples"});
  if (j.contains("A")) c.a = as_matrix(j["A"], path + ".A");
  if (j.contains("B")) c.b = as_matrix(j["B"], path + ".B");
  if (j.contains("control_levels")) c.control_levels = as_numbers(j["control_levels"], path + ".control_levels");
  if (j.contains("adversary_levels"))
    c.adversary_levels = as_numbers(j["adversary_levels"], path + ".adversary_levels");
  if (j.contains("noise_variance")) c.noise_variance = as_number(j["noise_variance"], path + ".noise_variance");
  if (j.contains("lo")) c.lo = as_numbers(j["lo"], path + ".lo");
  if (j.contains("hi")) c.hi = as_numbers(j["hi"], path + ".hi");
  if (j.contains("cells")) c.cells = as_sizes(j["cells"], path + ".cells");
  if (j.contains("initial")) c.initial = as_numbers(j["initial"], path + ".initial");
  if (j.contains("samples")) c.samples = as_uint(j["samples"], path + ".samples");
  check(c);
}

std::string label_text(std::uint64_t label, const std::vector<std::string>& props) {
  std::string out;
  for (std::size_t b = 0; b < props.size(); ++b)
    if (label >> b & 1) out += (out.empty() ? "" : ";") + props[b];
  return out;
}

std::string valuation_text(const Valuation& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

Json dsg_to_json(const Dsg& g) {
  Json j;
  j["states"] = g.states;
  j["initial"] = g.states[g.initial];
  j["propositions"] = g.propositions;
  Json labels = Json::object();
  for (std::size_t s = 0; s < g.size(); ++s) {
    std::vector<std::string> props;
    for (std::size_t b = 0; b < g.propositions.size(); ++b)
      if (g.labels[s] >> b & 1) props.push_back(g.propositions[b]);
    if (!props.empty()) labels[g.states[s]] = props;
  }
  j["labels"] = labels;
  j["defender_actions"] = g.defender_actions;
  j["adversary_actions"] = g.adversary_actions;
  j["clocks"] = g.clocks;
  Json enabled = Json::object();
  for (std::size_t s = 0; s < g.size(); ++s) {
    const bool all_c = g.nc(s) == g.defender_actions.size(), all_a = g.na(s) == g.adversary_actions.size();
    bool identity = all_c && all_a;
    for (std::size_t c = 0; identity && c < g.nc(s); ++c) identity = g.defender_of[s][c] == c;
    for (std::size_t a = 0; identity && a < g.na(s); ++a) identity = g.adversary_of[s][a] == a;
    if (identity) continue;
    Json e;
    std::vector<std::string> dn, an;
    for (auto c : g.defender_of[s]) dn.push_back(g.defender_actions[c]);
    for (auto a : g.adversary_of[s]) an.push_back(g.adversary_actions[a]);
    e["defender"] = dn;
    e["adversary"] = an;
    enabled[g.states[s]] = e;
  }
  j["enabled"] = enabled;
  Json tr = Json::array();
  for (std::size_t s = 0; s < g.size(); ++s)
    for (std::size_t c = 0; c < g.nc(s); ++c)
      for (std::size_t a = 0; a < g.na(s); ++a)
        for (const auto& o : g.row(s, c, a)) {
          Json t;
          t["from"] = g.states[s];
          t["defender"] = g.defender_actions[g.defender_of[s][c]];
          t["adversary"] = g.adversary_actions[g.adversary_of[s][a]];
          t["to"] = g.states[o.to];
          t["p"] = o.p;
          Json d = Json::array();
          for (const auto& [ticks, p] : o.durations) d.push_back(Json::array({ticks, p}));
          t["durations"] = d;
          tr.push_back(t);
        }
  j["transitions"] = tr;
  return j;
}

Dsg dsg_from_json(const Json& j, const std::string& path) {
  allow_keys(j, path, {"states", "initial", "propositions", "labels", "defender_actions", "adversary_actions",
                       "clocks", "enabled", "transitions"});
  Dsg g;
  g.states = as_strings(need(j, "states", path), path + ".states");
  if (g.states.empty()) fail(path + ".states", "at least one state is required");
  require_unique(g.states, path + ".states");
  g.initial = index_of(g.states, as_string(need(j, "initial", path), path + ".initial"), path + ".initial", "state");
  g.propositions = j.contains("propositions") ? as_strings(j["propositions"], path + ".propositions")
                                              : std::vector<std::string>{};
  require_unique(g.propositions, path + ".propositions");
  if (g.propositions.size() > 64) fail(path + ".propositions", "at most 64 propositions");
  g.labels.assign(g.size(), 0);
  if (j.contains("labels")) {
    const Json& l = j["labels"];
    if (!l.is_object()) fail(path + ".labels", "expected an object");
    for (const auto& [name, props] : l.items()) {
      const std::string p = path + ".labels." + name;
      const std::size_t s = index_of(g.states, name, p, "state");
      for (const auto& prop : as_strings(props, p))
        g.labels[s] |= std::uint64_t{1} << index_of(g.propositions, prop, p, "proposition");
    }
  }
  g.defender_actions = as_strings(need(j, "defender_actions", path), path + ".defender_actions");
  g.adversary_actions = as_strings(need(j, "adversary_actions", path), path + ".adversary_actions");
  require_unique(g.defender_actions, path + ".defender_actions");
  require_unique(g.adversary_actions, path + ".adversary_actions");
  g.clocks = j.contains("clocks") ? as_strings(j["clocks"], path + ".clocks") : std::vector<std::string>{};
  std::vector<std::size_t> all_c(g.defender_actions.size()), all_a(g.adversary_actions.size());
  for (std::size_t i = 0; i < all_c.size(); ++i) all_c[i] = i;
  for (std::size_t i = 0; i < all_a.size(); ++i) all_a[i] = i;
  g.defender_of.assign(g.size(), all_c);
  g.adversary_of.assign(g.size(), all_a);
  if (j.contains("enabled")) {
    const Json& e = j["enabled"];
    if (!e.is_object()) fail(path + ".enabled", "expected an object");
    for (const auto& [name, sets] : e.items()) {
      const std::string p = path + ".enabled." + name;
      const std::size_t s = index_of(g.states, name, p, "state");
      allow_keys(sets, p, {"defender", "adversary"});
      if (sets.contains("defender")) {
        g.defender_of[s].clear();
        for (const auto& a : as_strings(sets["defender"], p + ".defender"))
          g.defender_of[s].push_back(index_of(g.defender_actions, a, p + ".defender", "defender action"));
      }
      if (sets.contains("adversary")) {
        g.adversary_of[s].clear();
        for (const auto& a : as_strings(sets["adversary"], p + ".adversary"))
          g.adversary_of[s].push_back(index_of(g.adversary_actions, a, p + ".adversary", "adversary action"));
      }
    }
  }
  g.kernel.resize(g.size());
  for (std::size_t s = 0; s < g.size(); ++s) g.kernel[s].assign(g.nc(s) * g.na(s), {});
  const Json& tr = need(j, "transitions", path);
  if (!tr.is_array()) fail(path + ".transitions", "expected an array");
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const std::string p = path + ".transitions[" + std::to_string(i) + "]";
    const Json& t = tr[i];
    allow_keys(t, p, {"from", "defender", "adversary", "to", "p", "durations"});
    const std::size_t s = index_of(g.states, as_string(need(t, "from", p), p + ".from"), p + ".from", "state");
    const std::size_t gc =
        index_of(g.defender_actions, as_string(need(t, "defender", p), p + ".defender"), p + ".defender", "defender action");
    const std::size_t ga = index_of(g.adversary_actions, as_string(need(t, "adversary", p), p + ".adversary"),
                                    p + ".adversary", "adversary action");
    auto lc = std::find(g.defender_of[s].begin(), g.defender_of[s].end(), gc);
    auto la = std::find(g.adversary_of[s].begin(), g.adversary_of[s].end(), ga);
    if (lc == g.defender_of[s].end()) fail(p + ".defender", "action not enabled at " + g.states[s]);
    if (la == g.adversary_of[s].end()) fail(p + ".adversary", "action not enabled at " + g.states[s]);
    Outcome o;
    o.to = index_of(g.states, as_string(need(t, "to", p), p + ".to"), p + ".to", "state");
    o.p = as_number(need(t, "p", p), p + ".p");
    if (t.contains("durations")) {
      const Json& d = t["durations"];
      if (!d.is_array()) fail(p + ".durations", "expected an array of [ticks, probability] pairs");
      for (std::size_t k = 0; k < d.size(); ++k) {
        const std::string dp = p + ".durations[" + std::to_string(k) + "]";
        if (!d[k].is_array() || d[k].size() != 2) fail(dp, "expected [ticks, probability]");
        o.durations.emplace_back(as_int(d[k][0], dp + "[0]"), as_number(d[k][1], dp + "[1]"));
      }
      std::sort(o.durations.begin(), o.durations.end());
      for (std::size_t k = 1; k < o.durations.size(); ++k)
        if (o.durations[k].first == o.durations[k - 1].first) fail(p + ".durations", "duplicate duration");
    }
    auto& row = g.row(s, static_cast<std::size_t>(lc - g.defender_of[s].begin()),
                      static_cast<std::size_t>(la - g.adversary_of[s].begin()));
    for (const auto& other : row)
      if (other.to == o.to) fail(p, "duplicate successor " + g.states[o.to]);
    row.push_back(std::move(o));
  }
  require_valid(g);
  return g;
}

Json tba_to_json(const TimedBuchiAutomaton& a) {
  Json j;
  j["states"] = a.states;
  j["initial"] = a.states[a.initial];
  std::vector<std::string> acc;
  for (std::size_t q = 0; q < a.states.size(); ++q)
    if (a.accepting[q]) acc.push_back(a.states[q]);
  j["accepting"] = acc;
  j["propositions"] = a.propositions;
  j["clocks"] = a.clocks;
  Json edges = Json::array();
  for (const auto& e : a.edges) {
    Json x;
    x["from"] = a.states[e.from];
    x["to"] = a.states[e.to];
    x["letter"] = to_string(*e.letter);
    x["guard"] = to_string(e.guard, a.clocks);
    std::vector<std::string> resets;
    for (auto r : e.resets) resets.push_back(a.clocks[r]);
    x["resets"] = resets;
    edges.push_back(x);
  }
  j["edges"] = edges;
  return j;
}

TimedBuchiAutomaton tba_from_json(const Json& j, const std::string& path) {
  allow_keys(j, path, {"states", "initial", "accepting", "propositions", "clocks", "edges"});
  TimedBuchiAutomaton a;
  a.states = as_strings(need(j, "states", path), path + ".states");
  if (a.states.empty()) fail(path + ".states", "at least one state is required");
  require_unique(a.states, path + ".states");
  a.initial = index_of(a.states, as_string(need(j, "initial", path), path + ".initial"), path + ".initial", "state");
  a.accepting.assign(a.states.size(), false);
  for (const auto& q : as_strings(need(j, "accepting", path), path + ".accepting"))
    a.accepting[index_of(a.states, q, path + ".accepting", "state")] = true;
  a.propositions = j.contains("propositions") ? as_strings(j["propositions"], path + ".propositions")
                                              : std::vector<std::string>{};
  require_unique(a.propositions, path + ".propositions");
  a.clocks = j.contains("clocks") ? as_strings(j["clocks"], path + ".clocks") : std::vector<std::string>{};
  require_unique(a.clocks, path + ".clocks");
  Vocabulary vocab;
  vocab.atoms.insert(a.propositions.begin(), a.propositions.end());
  const Json& edges = need(j, "edges", path);
  if (!edges.is_array()) fail(path + ".edges", "expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string p = path + ".edges[" + std::to_string(i) + "]";
    allow_keys(edges[i], p, {"from", "to", "letter", "guard", "resets"});
    TbaEdge e;
    e.from = index_of(a.states, as_string(need(edges[i], "from", p), p + ".from"), p + ".from", "state");
    e.to = index_of(a.states, as_string(need(edges[i], "to", p), p + ".to"), p + ".to", "state");
    e.letter = parse_mitl(edges[i].contains("letter") ? as_string(edges[i]["letter"], p + ".letter") : "true", vocab);
    e.guard = parse_clock_constraint(edges[i].contains("guard") ? as_string(edges[i]["guard"], p + ".guard") : "true",
                                     a.clocks);
    if (edges[i].contains("resets"))
      for (const auto& c : as_strings(edges[i]["resets"], p + ".resets"))
        e.resets.push_back(index_of(a.clocks, c, p + ".resets", "clock"));
    a.edges.push_back(std::move(e));
  }
  a.check();
  return a;
}

Json policy_to_json(const FiniteStateController& fsc, const Dsg& g, const TimedBuchiAutomaton& a) {
  auto row_json = [&](std::size_t s, const ActionDistribution& row) {
    Json r = Json::array();
    for (const auto& [c, p] : row) r.push_back(Json::array({g.defender_actions[g.defender_of[s][c]], p}));
    return r;
  };
  Json j;
  j["schema"] = kSchemaVersion;
  j["clocks"] = fsc.clocks;
  j["lambda_cap"] = fsc.lambda_cap;
  j["threshold"] = fsc.threshold ? Json(*fsc.threshold) : Json(nullptr);
  Json mu0 = Json::array();
  for (const auto& [k, row] : fsc.mu0) {
    const auto& [lambda, s, q, observed] = k;
    Json e;
    e["lambda"] = valuation_json(lambda);
    e["state"] = g.states[s];
    e["q"] = a.states[q];
    e["observed"] = valuation_json(observed);
    e["row"] = row_json(s, row);
    mu0.push_back(e);
  }
  j["mu0"] = mu0;
  Json mu1 = Json::array();
  for (const auto& [k, row] : fsc.mu1) {
    const auto& [lambda, s, q] = k;
    Json e;
    e["lambda"] = valuation_json(lambda);
    e["state"] = g.states[s];
    e["q"] = a.states[q];
    e["row"] = row_json(s, row);
    mu1.push_back(e);
  }
  j["mu1"] = mu1;
  Json dur = Json::array();
  for (const auto& [k, ticks] : fsc.duration_estimate) {
    const auto& [s, c, s2] = k;
    Json e;
    e["from"] = g.states[s];
    e["action"] = g.defender_actions[g.defender_of[s][c]];
    e["to"] = g.states[s2];
    e["ticks"] = ticks;
    dur.push_back(e);
  }
  j["durations"] = dur;
  return j;
}

FiniteStateController policy_from_json(const Json& j, const Dsg& g, const TimedBuchiAutomaton& a) {
  const std::string path = "$";
  allow_keys(j, path, {"schema", "clocks", "lambda_cap", "threshold", "mu0", "mu1", "durations"});
  if (as_int(need(j, "schema", path), "$.schema") != kSchemaVersion) fail("$.schema", "unsupported schema version");
  FiniteStateController fsc;
  fsc.clocks = as_strings(need(j, "clocks", path), "$.clocks");
  if (fsc.clocks != a.clocks) throw validation_error("ClockSetMismatch", "policy clocks differ from the automaton's");
  fsc.lambda_cap = as_int(need(j, "lambda_cap", path), "$.lambda_cap");
  const Json& th = need(j, "threshold", path);
  if (!th.is_null()) fsc.threshold = as_number(th, "$.threshold");
  auto local_action = [&](std::size_t s, const std::string& name, const std::string& p) {
    const std::size_t gidx = index_of(g.defender_actions, name, p, "defender action");
    auto it = std::find(g.defender_of[s].begin(), g.defender_of[s].end(), gidx);
    if (it == g.defender_of[s].end()) fail(p, "action '" + name + "' not enabled at " + g.states[s]);
    return static_cast<std::size_t>(it - g.defender_of[s].begin());
  };
  auto read_row = [&](std::size_t s, const Json& r, const std::string& p) {
    if (!r.is_array()) fail(p, "expected an array of [action, probability] pairs");
    ActionDistribution row;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string ep = p + "[" + std::to_string(i) + "]";
      if (!r[i].is_array() || r[i].size() != 2) fail(ep, "expected [action, probability]");
      row.emplace_back(local_action(s, as_string(r[i][0], ep + "[0]"), ep + "[0]"), as_number(r[i][1], ep + "[1]"));
    }
    check_distribution(row, g.nc(s), p);
    return row;
  };
  const Json& mu0 = need(j, "mu0", path);
  if (!mu0.is_array()) fail("$.mu0", "expected an array");
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    const std::string p = "$.mu0[" + std::to_string(i) + "]";
    allow_keys(mu0[i], p, {"lambda", "state", "q", "observed", "row"});
    const std::size_t s = index_of(g.states, as_string(need(mu0[i], "state", p), p + ".state"), p + ".state", "state");
    const std::size_t q = index_of(a.states, as_string(need(mu0[i], "q", p), p + ".q"), p + ".q", "automaton state");
    FiniteStateController::Key0 key{valuation_from(need(mu0[i], "lambda", p), p + ".lambda"), s, q,
                                    valuation_from(need(mu0[i], "observed", p), p + ".observed")};
    if (!fsc.mu0.emplace(key, read_row(s, need(mu0[i], "row", p), p + ".row")).second) fail(p, "duplicate key");
  }
  const Json& mu1 = need(j, "mu1", path);
  if (!mu1.is_array()) fail("$.mu1", "expected an array");
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    const std::string p = "$.mu1[" + std::to_string(i) + "]";
    allow_keys(mu1[i], p, {"lambda", "state", "q", "row"});
    const std::size_t s = index_of(g.states, as_string(need(mu1[i], "state", p), p + ".state"), p + ".state", "state");
    const std::size_t q = index_of(a.states, as_string(need(mu1[i], "q", p), p + ".q"), p + ".q", "automaton state");
    FiniteStateController::Key1 key{valuation_from(need(mu1[i], "lambda", p), p + ".lambda"), s, q};
    if (!fsc.mu1.emplace(key, read_row(s, need(mu1[i], "row", p), p + ".row")).second) fail(p, "duplicate key");
  }
  if (j.contains("durations")) {
    const Json& d = j["durations"];
    if (!d.is_array()) fail("$.durations", "expected an array");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string p = "$.durations[" + std::to_string(i) + "]";
      allow_keys(d[i], p, {"from", "action", "to", "ticks"});
      const std::size_t s = index_of(g.states, as_string(need(d[i], "from", p), p + ".from"), p + ".from", "state");
      const std::size_t c = local_action(s, as_string(need(d[i], "action", p), p + ".action"), p + ".action");
      const std::size_t s2 = index_of(g.states, as_string(need(d[i], "to", p), p + ".to"), p + ".to", "state");
      const std::int64_t ticks = as_int(need(d[i], "ticks", p), p + ".ticks");
      if (ticks <= 0) fail(p + ".ticks", "must be positive");
      fsc.duration_estimate[{s, c, s2}] = ticks;
    }
  }
  return fsc;
}

Json gamecs_to_json(const GamecSet& set, const Game& z) {
  Json comps = Json::array();
  for (const auto& c : set.components) {
    Json e;
    Json states = Json::array();
    for (std::size_t i = 0; i < c.states.size(); ++i) {
      Json s;
      s["state"] = z.names[c.states[i]];
      s["accepting"] = static_cast<bool>(z.accepting[c.states[i]]);
      s["rows"] = c.rows[i];
      states.push_back(s);
    }
    e["states"] = states;
    comps.push_back(e);
  }
  Json j;
  j["components"] = comps;
  return j;
}

Json product_to_json(const ProductGame& p, const Dsg& g, const TimedBuchiAutomaton& a) {
  Json states = Json::array();
  for (std::size_t i = 0; i < p.states.size(); ++i) {
    Json e;
    e["name"] = p.name(i, g, a);
    e["accepting"] = static_cast<bool>(p.accepting[i]);
    e["defender_actions"] = p.nc[i];
    e["adversary_actions"] = p.na[i];
    Json rows = Json::array();
    for (std::size_t c = 0; c < p.nc[i]; ++c)
      for (std::size_t u = 0; u < p.na[i]; ++u) {
        Json succ = Json::array();
        for (const auto& [to, pr] : p.row(i, c, u)) succ.push_back(Json::array({to, pr}));
        rows.push_back({{"defender", c}, {"adversary", u}, {"successors", succ}});
      }
    e["rows"] = rows;
    states.push_back(e);
  }
  Json j;
  j["initial"] = p.initial;
  j["valuation_cap"] = p.cap;
  j["states"] = states;
  return j;
}

Json global_to_json(const GlobalGame& gg) {
  const Game& z = gg.game;
  Json states = Json::array();
  for (std::size_t s = 0; s < z.size(); ++s) {
    Json e;
    e["name"] = z.names[s];
    e["accepting"] = static_cast<bool>(z.accepting[s]);
    e["rows"] = z.rows[s];
    Json cols = Json::array();
    for (const auto& c : gg.columns[s]) cols.push_back({{"ua", c.ua}, {"observed", c.observed}, {"detect", c.detect}});
    e["columns"] = cols;
    Json blocks = Json::array();
    for (std::size_t r = 0; r < z.rows[s]; ++r)
      for (std::size_t c = 0; c < z.cols[s]; ++c) {
        Json succ = Json::array();
        for (const auto& x : z.block(s, r, c)) succ.push_back(Json::array({x.to, x.p}));
        blocks.push_back({{"row", r}, {"column", c}, {"successors", succ}});
      }
    e["blocks"] = blocks;
    states.push_back(e);
  }
  Json j;
  j["initial"] = z.initial;
  j["kappa_max"] = gg.options.kappa_max;
  j["fsc_size"] = gg.options.fsc_size;
  j["detect_threshold"] = gg.options.detect_threshold ? Json(*gg.options.detect_threshold) : Json(nullptr);
  j["lambda_cap"] = gg.lambda_cap;
  j["states"] = states;
  return j;
}

ModelFile parse_model(const Json& j) {
  const std::string path = "$";
  allow_keys(j, path, {"schema", "seed", "spec", "tba", "model", "game", "solver", "simulation"});
  ModelFile m;
  m.source = j;
  if (as_int(need(j, "schema", path), "$.schema") != kSchemaVersion) fail("$.schema", "unsupported schema version");
  if (j.contains("seed")) m.seed = as_uint(j["seed"], "$.seed");
  if (j.contains("spec")) m.spec = as_string(j["spec"], "$.spec");
  if (j.contains("tba")) m.tba = j["tba"];
  if (j.contains("game")) {
    const Json& gj = j["game"];
    allow_keys(gj, "$.game", {"kappa_max", "fsc_size", "detect_threshold"});
    if (gj.contains("kappa_max")) m.game.kappa_max = as_int(gj["kappa_max"], "$.game.kappa_max");
    if (gj.contains("fsc_size")) m.game.fsc_size = as_int(gj["fsc_size"], "$.game.fsc_size");
    if (gj.contains("detect_threshold")) {
      if (gj["detect_threshold"].is_null())
        m.game.detect_threshold.reset();
      else
        m.game.detect_threshold = as_number(gj["detect_threshold"], "$.game.detect_threshold");
    }
    if (m.game.kappa_max < 0) fail("$.game.kappa_max", "must be non-negative");
    if (m.game.fsc_size < 0) fail("$.game.fsc_size", "must be non-negative");
  }
  if (j.contains("solver")) {
    const Json& sj = j["solver"];
    allow_keys(sj, "$.solver", {"epsilon", "target"});
    if (sj.contains("epsilon")) m.epsilon = as_number(sj["epsilon"], "$.solver.epsilon");
    if (!(m.epsilon > 0)) fail("$.solver.epsilon", "must be positive");
    if (sj.contains("target")) {
      const std::string t = as_string(sj["target"], "$.solver.target");
      if (t == "gamec") m.target = TargetMode::GamecUnion;
      else if (t == "accepting") m.target = TargetMode::Accepting;
      else fail("$.solver.target", "expected 'gamec' or 'accepting'");
    }
  }
  if (j.contains("simulation")) {
    const Json& sj = j["simulation"];
    allow_keys(sj, "$.simulation", {"horizon", "rollouts", "passive_action"});
    if (sj.contains("horizon")) m.horizon = as_int(sj["horizon"], "$.simulation.horizon");
    if (sj.contains("rollouts")) m.rollouts = as_uint(sj["rollouts"], "$.simulation.rollouts");
    if (sj.contains("passive_action")) m.passive_action = as_uint(sj["passive_action"], "$.simulation.passive_action");
    if (m.horizon < 0) fail("$.simulation.horizon", "must be non-negative");
  }
  const Json& mj = need(j, "model", path);
  const std::string kind = as_string(need(mj, "kind", "$.model"), "$.model.kind");
  if (kind == "explicit") {
    allow_keys(mj, "$.model", {"kind", "dsg"});
    m.kind = ModelKind::Explicit;
    m.dsg = dsg_from_json(need(mj, "dsg", "$.model"), "$.model.dsg");
  } else if (kind == "abstraction") {
    allow_keys(mj, "$.model", {"kind", "variables", "lo", "hi", "cells", "defender", "adversary", "samples",
                               "overflow", "initial", "dynamics"});
    m.kind = ModelKind::Abstraction;
    AbstractionRequest req;
    Partition& p = req.partition;
    p.variables = as_strings(need(mj, "variables", "$.model"), "$.model.variables");
    require_unique(p.variables, "$.model.variables");
    p.lo = as_numbers(need(mj, "lo", "$.model"), "$.model.lo");
    p.hi = as_numbers(need(mj, "hi", "$.model"), "$.model.hi");
    p.cells = as_sizes(need(mj, "cells", "$.model"), "$.model.cells");
    const std::size_t dims = p.variables.size();
    if (p.lo.size() != dims || p.hi.size() != dims || p.cells.size() != dims)
      fail("$.model", "lo, hi and cells need one entry per variable");
    for (const char* side : {"defender", "adversary"}) {
      const Json& arr = need(mj, side, "$.model");
      const std::string ap = std::string("$.model.") + side;
      if (!arr.is_array() || arr.empty()) fail(ap, "expected a non-empty array of input actions");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        auto a = input_action(arr[i], ap + "[" + std::to_string(i) + "]");
        (std::string(side) == "defender" ? p.defender : p.adversary).push_back(std::move(a));
      }
    }
    if (mj.contains("samples")) req.samples = as_uint(mj["samples"], "$.model.samples");
    if (mj.contains("overflow")) {
      const std::string o = as_string(mj["overflow"], "$.model.overflow");
      if (o == "sink") req.overflow = Overflow::Sink;
      else if (o == "saturate") req.overflow = Overflow::Saturate;
      else if (o == "error") req.overflow = Overflow::Error;
      else fail("$.model.overflow", "expected 'sink', 'saturate' or 'error'");
    }
    if (mj.contains("initial")) req.initial_point = as_numbers(mj["initial"], "$.model.initial");
    const Json& dyn = need(mj, "dynamics", "$.model");
    allow_keys(dyn, "$.model.dynamics", {"type", "A", "B", "noise_variance"});
    if (as_string(need(dyn, "type", "$.model.dynamics"), "$.model.dynamics.type") != "linear")
      fail("$.model.dynamics.type", "only 'linear' dynamics are supported");
    const auto a = as_matrix(need(dyn, "A", "$.model.dynamics"), "$.model.dynamics.A");
    const auto b = as_matrix(need(dyn, "B", "$.model.dynamics"), "$.model.dynamics.B");
    if (a.size() != dims) fail("$.model.dynamics.A", "needs one row per variable");
    if (b.size() != dims) fail("$.model.dynamics.B", "needs one row per variable");
    const double var = dyn.contains("noise_variance") ? as_number(dyn["noise_variance"], "$.model.dynamics.noise_variance") : 0.0;
    LinearOracle check_oracle(a, b, var);
    m.dynamics = dyn;
    m.request = std::move(req);
  } else if (kind == "benchmark") {
    allow_keys(mj, "$.model", {"kind", "name", "overrides"});
    m.kind = ModelKind::Benchmark;
    m.benchmark = as_string(need(mj, "name", "$.model"), "$.model.name");
    const Json overrides = mj.contains("overrides") ? mj["overrides"] : Json::object();
    if (m.benchmark == "traffic") {
      m.traffic = default_traffic();
      apply_traffic_overrides(*m.traffic, overrides, "$.model.overrides");
    } else if (m.benchmark == "twotank") {
      m.twotank = default_twotank();
      apply_twotank_overrides(*m.twotank, overrides, "$.model.overrides");
    } else {
      fail("$.model.name", "expected 'traffic' or 'twotank'");
    }
  } else {
    fail("$.model.kind", "expected 'explicit', 'abstraction' or 'benchmark'");
  }
  return m;
}

ModelFile load_model(const std::string& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error("SchemaError", path + ": " + e.what());
  }
  return parse_model(j);
}

Vocabulary model_vocabulary(const ModelFile& m) {
  Vocabulary v;
  switch (m.kind) {
    case ModelKind::Explicit: v.atoms.insert(m.dsg->propositions.begin(), m.dsg->propositions.end()); break;
    case ModelKind::Abstraction:
      v.variables.insert(m.request->partition.variables.begin(), m.request->partition.variables.end());
      v.atoms.insert(kOverflowState);
      break;
    case ModelKind::Benchmark:
      if (m.traffic)
        for (std::size_t i = 0; i < m.traffic->capacity.size(); ++i) v.variables.insert("x" + std::to_string(i + 1));
      else
        v.variables = {"x1", "x2"};
      break;
  }
  return v;
}

Dsg build_model_dsg(const ModelFile& m, const std::vector<std::string>& atoms, unsigned threads) {
  switch (m.kind) {
    case ModelKind::Explicit: return *m.dsg;
    case ModelKind::Abstraction: {
      AbstractionRequest req = *m.request;
      for (const auto& a : atoms)
        if (a != kOverflowState) req.atoms.push_back(a);
      req.seed = m.seed;
      req.threads = threads;
      const Json& dyn = *m.dynamics;
      LinearOracle oracle(as_matrix(dyn["A"], "$.model.dynamics.A"), as_matrix(dyn["B"], "$.model.dynamics.B"),
                          dyn.contains("noise_variance") ? as_number(dyn["noise_variance"], "$") : 0.0);
      return build_abstraction(oracle, req);
    }
    case ModelKind::Benchmark:
      if (m.traffic) return build_abstraction(*traffic_oracle(*m.traffic), traffic_request(*m.traffic, atoms, m.seed, threads));
      return build_abstraction(*twotank_oracle(*m.twotank), twotank_request(*m.twotank, atoms, m.seed, threads));
  }
  throw runtime_error("Unreachable", "unknown model kind");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
  return out + "\r\n";
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string rollout_csv(const Rollout& r, const Dsg& g) {
  std::string out = csv_line({"tick", "true_time", "observed_time", "dsg_state", "q", "v", "lambda", "b", "uC", "uA",
                              "hypothesis", "label"});
  for (const auto& s : r.steps)
    out += csv_line({std::to_string(s.tick), std::to_string(s.true_time), std::to_string(s.observed_time),
                     g.states[s.dsg_state], std::to_string(s.q), valuation_text(s.v), valuation_text(s.lambda),
                     s.manipulated ? "1" : "0", g.defender_actions[s.uc], g.adversary_actions[s.ua],
                     s.hypothesis == Hypothesis::H0 ? "H0" : "H1", label_text(s.label, g.propositions)});
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw runtime_error("FileError", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw runtime_error("FileError", "cannot write " + path);
  out << content;
  if (!out) throw runtime_error("FileError", "write failed for " + path);
}

}  // namespace mitlgame
