#include "mitlgame/bench.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mitlgame/error.hpp"

namespace mitlgame {

namespace {

std::size_t radix_index(const std::vector<std::size_t>& digits, const std::vector<std::size_t>& base) {
  std::size_t idx = 0, stride = 1;
  for (std::size_t n = 0; n < base.size(); ++n) {
    if (digits[n] >= base[n]) throw validation_error("BadAction", "digit out of range");
    idx += digits[n] * stride;
    stride *= base[n];
  }
  return idx;
}

std::vector<std::size_t> radix_digits(std::size_t idx, const std::vector<std::size_t>& base) {
  std::vector<std::size_t> d(base.size());
  for (std::size_t n = 0; n < base.size(); ++n) {
    d[n] = idx % base[n];
    idx /= base[n];
  }
  return d;
}

std::vector<std::size_t> defender_base(const TrafficConfig& cfg) {
  std::vector<std::size_t> b;
  for (const auto& in : cfg.intersections) b.push_back(in.size());
  return b;
}

std::vector<std::size_t> adversary_base(const TrafficConfig& cfg) {
  std::vector<std::size_t> b;
  for (const auto& in : cfg.intersections) b.push_back(in.size() + 1);
  return b;
}

std::size_t product_of(const std::vector<std::size_t>& base) {
  std::size_t n = 1;
  for (auto b : base) n *= b;
  return n;
}

std::string digit_name(char prefix, const std::vector<std::size_t>& d) {
  std::string s(1, prefix);
  for (auto x : d) s += std::to_string(x);
  return s;
}

std::vector<double> to_input(const std::vector<std::size_t>& d) {
  std::vector<double> u;
  for (auto x : d) u.push_back(static_cast<double>(x));
  return u;
}

ActionDistribution point(std::size_t action) { return {{action, 1.0}}; }

}  // namespace

TrafficConfig default_traffic() {
  TrafficConfig c;
  c.capacity = {30, 30, 30, 30, 30, 40, 40, 40, 40, 40};
  c.flow = {10, 10, 10, 10, 5, 5, 5, 5, 5, 5};
  c.arrival_mean = {5, 0, 0, 0, 5, 5, 0, 0, 5, 5};
  // Link l is index l - 1.
  c.turn = {{{0, 1}, 0.3}, {{1, 2}, 0.5}, {{2, 3}, 0.5}, {{4, 1}, 0.5},
            {{5, 1}, 0.5}, {{6, 2}, 0.5}, {{7, 3}, 0.5}};
  c.supply = 1.0;
  c.intersections = {{{0}, {4, 5}}, {{1}, {6}}, {{2}, {7}}, {{3}, {8, 9}}};
  c.cells = {1, 3, 3, 3, 1, 1, 1, 1, 1, 1};
  c.initial = {10, 15, 15, 15, 10, 10, 10, 10, 10, 10};
  c.horizon = 5;
  c.samples = 100;
  return c;
}

void check(const TrafficConfig& cfg) {
  auto bad = [](const std::string& m) { return validation_error("BadTrafficConfig", m); };
  const std::size_t l = cfg.capacity.size();
  if (l == 0) throw bad("no links");
  if (cfg.flow.size() != l || cfg.arrival_mean.size() != l || cfg.cells.size() != l || cfg.initial.size() != l)
    throw bad("per-link vectors must have one entry per link");
  for (std::size_t i = 0; i < l; ++i) {
    if (!(cfg.capacity[i] > 0)) throw bad("capacities must be positive");
    if (cfg.flow[i] < 0 || cfg.arrival_mean[i] < 0) throw bad("flows and arrival means must be non-negative");
    if (cfg.cells[i] == 0) throw bad("every link needs at least one cell");
    if (cfg.initial[i] < 0 || cfg.initial[i] > cfg.capacity[i]) throw bad("initial queue outside [0, capacity]");
  }
  if (cfg.supply < 0 || cfg.supply > 1) throw bad("supply ratio must lie in [0, 1]");
  std::vector<double> out(l, 0.0);
  for (const auto& [k, g] : cfg.turn) {
    if (k.first >= l || k.second >= l) throw bad("turn ratio names an unknown link");
    if (g < 0 || g > 1) throw bad("turn ratios must lie in [0, 1]");
    out[k.first] += g;
  }
  for (double s : out)
    if (s > 1 + 1e-12) throw bad("turn ratios out of a link sum above 1");
  if (cfg.intersections.empty()) throw bad("no intersections");
  std::vector<int> owner(l, -1);
  for (std::size_t n = 0; n < cfg.intersections.size(); ++n) {
    if (cfg.intersections[n].empty()) throw bad("intersection without actuable subsets");
    for (const auto& sub : cfg.intersections[n])
      for (auto link : sub) {
        if (link >= l) throw bad("subset names an unknown link");
        if (owner[link] != -1) throw bad("link actuated by more than one subset");
        owner[link] = static_cast<int>(n);
      }
  }
  if (cfg.horizon <= 0) throw bad("horizon must be positive");
  if (cfg.samples == 0) throw bad("samples must be positive");
}

TrafficOracle::TrafficOracle(TrafficConfig cfg) : cfg_(std::move(cfg)) { check(cfg_); }

std::vector<double> TrafficOracle::sample_noise(std::mt19937_64& rng) const {
  std::vector<double> w(cfg_.capacity.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    if (cfg_.arrival_mean[i] > 0) w[i] = static_cast<double>(std::poisson_distribution<int>(cfg_.arrival_mean[i])(rng));
  return w;
}

std::vector<std::uint32_t> TrafficOracle::realized(const std::vector<double>& uc, const std::vector<double>& ua) const {
  std::vector<std::uint32_t> out(cfg_.intersections.size(), 0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const auto k = static_cast<int>(cfg_.intersections[n].size());
    const auto chosen = static_cast<int>(std::lround(uc.at(n)));
    const auto attack = static_cast<int>(std::lround(ua.at(n)));
    if (chosen < 0 || chosen >= k || attack < 0 || attack > k)
      throw validation_error("BadAction", "subset index out of range");
    std::uint32_t mask = 1u << chosen;
    if (attack > 0) {
      const std::uint32_t hit = 1u << (attack - 1);
      mask = cfg_.attack == AttackLaw::Toggle ? mask ^ hit : mask & ~hit;
    }
    out[n] = mask;
  }
  return out;
}

OracleResult TrafficOracle::apply(const std::vector<double>& x, const std::vector<double>& uc,
                                  const std::vector<double>& ua, const std::vector<double>& noise) const {
  const std::size_t l = cfg_.capacity.size();
  const auto green = realized(uc, ua);
  std::vector<bool> moving(l, false);
  for (std::size_t n = 0; n < green.size(); ++n)
    for (std::size_t j = 0; j < cfg_.intersections[n].size(); ++j)
      if (green[n] >> j & 1)
        for (auto link : cfg_.intersections[n][j]) moving[link] = true;
  // Discharge of every actuated link from the current queues.
  std::vector<double> f(l, 0.0);
  for (std::size_t i = 0; i < l; ++i) {
    if (!moving[i]) continue;
    double cap = std::min(cfg_.flow[i], std::max(0.0, x[i]));
    for (const auto& [k, g] : cfg_.turn)
      if (k.first == i && g > 0) cap = std::min(cap, cfg_.supply * std::max(0.0, cfg_.capacity[k.second] - x[k.second]) / g);
    f[i] = cap;
  }
  OracleResult r;
  r.x = x;
  for (std::size_t i = 0; i < l; ++i) r.x[i] -= f[i];
  for (const auto& [k, g] : cfg_.turn) r.x[k.second] += g * f[k.first];
  for (std::size_t i = 0; i < l; ++i) {
    r.x[i] = std::clamp(r.x[i], 0.0, cfg_.capacity[i]);
    // Arrivals beyond the residual capacity are turned away.
    r.x[i] += std::min(noise[i], cfg_.capacity[i] - r.x[i]);
  }
  r.duration = 1;
  return r;
}

std::vector<double> TrafficOracle::sample_in_cell(const std::vector<double>& lo, const std::vector<double>& hi,
                                                  std::mt19937_64& rng) const {
  std::vector<double> x(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    // Cells are (lo, hi] except the first, which starts at 0 inclusive.
    const auto first = static_cast<std::int64_t>(lo[i] <= 1e-9 ? std::ceil(lo[i] - 1e-9) : std::floor(lo[i] + 1e-9) + 1);
    const auto last = static_cast<std::int64_t>(std::floor(hi[i] + 1e-9));
    if (last < first) {
      x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
    } else {
      x[i] = static_cast<double>(std::uniform_int_distribution<std::int64_t>(first, last)(rng));
    }
  }
  return x;
}

std::unique_ptr<TrafficOracle> traffic_oracle(const TrafficConfig& cfg) { return std::make_unique<TrafficOracle>(cfg); }

std::vector<std::size_t> traffic_defender_digits(const TrafficConfig& cfg, std::size_t action) {
  return radix_digits(action, defender_base(cfg));
}
std::vector<std::size_t> traffic_adversary_digits(const TrafficConfig& cfg, std::size_t action) {
  return radix_digits(action, adversary_base(cfg));
}
std::size_t traffic_defender_index(const TrafficConfig& cfg, const std::vector<std::size_t>& digits) {
  return radix_index(digits, defender_base(cfg));
}
std::size_t traffic_adversary_index(const TrafficConfig& cfg, const std::vector<std::size_t>& digits) {
  return radix_index(digits, adversary_base(cfg));
}

AbstractionRequest traffic_request(const TrafficConfig& cfg, const std::vector<std::string>& atoms,
                                   std::uint64_t seed, unsigned threads) {
  check(cfg);
  AbstractionRequest req;
  Partition& p = req.partition;
  for (std::size_t i = 0; i < cfg.capacity.size(); ++i) {
    p.variables.push_back("x" + std::to_string(i + 1));
    p.lo.push_back(0.0);
    p.hi.push_back(cfg.capacity[i]);
  }
  p.cells = cfg.cells;
  const auto db = defender_base(cfg), ab = adversary_base(cfg);
  for (std::size_t c = 0; c < product_of(db); ++c) {
    auto d = radix_digits(c, db);
    p.defender.push_back({digit_name('g', d), to_input(d), to_input(d)});
  }
  for (std::size_t a = 0; a < product_of(ab); ++a) {
    auto d = radix_digits(a, ab);
    p.adversary.push_back({digit_name('a', d), to_input(d), to_input(d)});
  }
  req.atoms = atoms;
  req.samples = cfg.samples;
  req.seed = seed;
  req.overflow = Overflow::Saturate;
  req.initial_point = cfg.initial;
  req.threads = threads;
  // Pairs realizing the same signals share one sampled distribution.
  const auto law = cfg.attack;
  req.input_class = [db, ab, law](std::size_t c, std::size_t a) {
    auto dc = radix_digits(c, db), da = radix_digits(a, ab);
    std::uint64_t cls = 0;
    for (std::size_t n = db.size(); n-- > 0;) {
      std::uint64_t mask = std::uint64_t{1} << dc[n];
      if (da[n] > 0) {
        const std::uint64_t hit = std::uint64_t{1} << (da[n] - 1);
        mask = law == AttackLaw::Toggle ? mask ^ hit : mask & ~hit;
      }
      cls = (cls << db[n]) | mask;
    }
    return cls;
  };
  return req;
}

std::unique_ptr<DefenderPolicy> traffic_periodic_baseline(const TrafficConfig& cfg) {
  check(cfg);
  std::vector<std::size_t> first(cfg.intersections.size(), 0), second(cfg.intersections.size(), 0);
  for (std::size_t n = 0; n < second.size(); ++n) second[n] = cfg.intersections[n].size() > 1 ? 1 : 0;
  const std::size_t even = traffic_defender_index(cfg, first), odd = traffic_defender_index(cfg, second);
  return std::make_unique<FunctionPolicy>(
      [even, odd](const DefenderView& v) { return point(v.tick % 2 == 0 ? even : odd); });
}

std::unique_ptr<DefenderPolicy> traffic_always_green_baseline(const TrafficConfig& cfg) {
  check(cfg);
  const std::size_t idx = traffic_defender_index(cfg, std::vector<std::size_t>(cfg.intersections.size(), 0));
  return std::make_unique<FunctionPolicy>([idx](const DefenderView&) { return point(idx); });
}

std::unique_ptr<AdversaryPolicy> traffic_counter_adversary(const TrafficConfig& cfg) {
  check(cfg);
  return std::make_unique<FunctionAdversary>([cfg](const AdversaryView& view, const GlobalGame& gg) {
    const ActionDistribution row =
        view.defender->row(DefenderView{view.tick, view.s, view.q, view.lambda, view.detected, view.v});
    std::size_t best = 0;
    double mass = -1;
    for (const auto& [r, p] : row)
      if (p > mass) {
        mass = p;
        best = r;
      }
    auto d = traffic_defender_digits(cfg, best);
    for (auto& x : d) x += 1;
    const std::size_t ua = traffic_adversary_index(cfg, d);
    const auto& cols = gg.columns[view.global];
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (cols[c].ua == ua && (cols[c].observed == view.v || view.detected)) return c;
    throw runtime_error("NoColumn", "counter attack column missing at " + gg.game.names[view.global]);
  });
}

std::vector<std::string> signal_table(const TrafficConfig& cfg, const Rollout& r, std::size_t ticks) {
  std::vector<std::string> out;
  for (std::size_t t = 0; t < std::min(ticks, r.steps.size()); ++t) {
    const auto dc = traffic_defender_digits(cfg, r.steps[t].uc);
    const auto da = traffic_adversary_digits(cfg, r.steps[t].ua);
    std::string row;
    for (std::size_t n = 0; n < dc.size(); ++n) {
      bool main = dc[n] == 0;
      if (da[n] == 1) main = cfg.attack == AttackLaw::Toggle ? !main : false;
      row += main ? 'G' : 'R';
    }
    out.push_back(std::move(row));
  }
  return out;
}

TwoTankConfig default_twotank() {
  TwoTankConfig c;
  c.a = {{0.99, 0.01}, {0.01, 0.99}};
  // Pump gain large enough that the attack's extra inflow pushes a controller
  // tuned for the nominal plant out of the common band.
  c.b = {{400.0}, {-40.0}};
  c.control_levels = {0.0, 2.5e-4, 5e-4};
  c.adversary_levels = {0.0, 2e-4};
  c.noise_variance = 1.5e-5;
  c.lo = {0.0, 0.0};
  c.hi = {0.7, 0.7};
  c.cells = {7, 7};
  c.initial = {0.11, 0.35};
  c.samples = 200;
  return c;
}

void check(const TwoTankConfig& cfg) {
  auto bad = [](const std::string& m) { return validation_error("BadTwoTankConfig", m); };
  if (cfg.a.size() != 2 || cfg.a[0].size() != 2 || cfg.a[1].size() != 2) throw bad("A must be 2 x 2");
  if (cfg.b.size() != 2 || cfg.b[0].size() != 1 || cfg.b[1].size() != 1) throw bad("B must be 2 x 1");
  if (cfg.control_levels.empty() || cfg.adversary_levels.empty()) throw bad("input ranges must be non-empty");
  if (cfg.noise_variance < 0) throw bad("noise variance must be non-negative");
  if (cfg.lo.size() != 2 || cfg.hi.size() != 2 || cfg.cells.size() != 2 || cfg.initial.size() != 2)
    throw bad("box, cells and initial levels need two entries");
  for (std::size_t i = 0; i < 2; ++i) {
    if (!(cfg.lo[i] < cfg.hi[i])) throw bad("empty box");
    if (cfg.initial[i] < cfg.lo[i] || cfg.initial[i] > cfg.hi[i]) throw bad("initial level outside the box");
  }
  if (cfg.samples == 0) throw bad("samples must be positive");
}

std::unique_ptr<LinearOracle> twotank_oracle(const TwoTankConfig& cfg) {
  check(cfg);
  return std::make_unique<LinearOracle>(cfg.a, cfg.b, cfg.noise_variance);
}

AbstractionRequest twotank_request(const TwoTankConfig& cfg, const std::vector<std::string>& atoms,
                                   std::uint64_t seed, unsigned threads) {
  check(cfg);
  AbstractionRequest req;
  Partition& p = req.partition;
  p.variables = {"x1", "x2"};
  p.lo = cfg.lo;
  p.hi = cfg.hi;
  p.cells = cfg.cells;
  for (std::size_t i = 0; i < cfg.control_levels.size(); ++i)
    p.defender.push_back({"u" + std::to_string(i), {cfg.control_levels[i]}, {cfg.control_levels[i]}});
  for (std::size_t i = 0; i < cfg.adversary_levels.size(); ++i)
    p.adversary.push_back({"a" + std::to_string(i), {cfg.adversary_levels[i]}, {cfg.adversary_levels[i]}});
  req.atoms = atoms;
  req.samples = cfg.samples;
  req.seed = seed;
  req.overflow = Overflow::Saturate;
  req.initial_point = cfg.initial;
  req.threads = threads;
  return req;
}

std::vector<NamedSpec> builtin_specs() {
  Vocabulary traffic;
  for (int i = 1; i <= 10; ++i) traffic.variables.insert("x" + std::to_string(i));
  Vocabulary tanks;
  tanks.variables = {"x1", "x2"};
  std::string band;
  // Both levels inside [z, z + 0.1] for z in {0.3, 0.4, 0.5, 0.6}.
  const std::pair<const char*, const char*> bands[] = {{"0.3", "0.4"}, {"0.4", "0.5"}, {"0.5", "0.6"}, {"0.6", "0.7"}};
  for (const auto& [z, hi] : bands) {
    const std::string lo_s(z), hi_s(hi);
    if (!band.empty()) band += " | ";
    band += "(x1 >= " + lo_s + " & x1 <= " + hi_s + " & x2 >= " + lo_s + " & x2 <= " + hi_s + ")";
  }
  std::vector<NamedSpec> out = {
      {"phi1", "F[0,5] (x2 <= 10)", traffic, nullptr},
      {"phi2", "F[0,5] (x2 <= 10 & x3 <= 10)", traffic, nullptr},
      {"phi3", "F[0,5] (x2 <= 10 & x3 <= 10 & x4 <= 10)", traffic, nullptr},
      {"phi_twotank", "F[0,5] (" + band + ")", tanks, nullptr},
  };
  for (auto& s : out) s.formula = parse_mitl(s.text, s.vocabulary);
  return out;
}

const NamedSpec& builtin_spec(const std::string& name) {
  static const std::vector<NamedSpec> specs = builtin_specs();
  for (const auto& s : specs)
    if (s.name == name) return s;
  throw validation_error("UnknownSpec", "no built-in specification named '" + name + "'");
}

}  // namespace mitlgame
