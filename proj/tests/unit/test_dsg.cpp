#include <doctest.h>

#include <cmath>
#include <random>

#include "check_error.hpp"
#include "mitlgame/abstraction.hpp"
#include "mitlgame/bench.hpp"
#include "mitlgame/dsg.hpp"

using namespace mitlgame;

namespace {

Dsg one_state() {
  Dsg g;
  g.states = {"s0"};
  g.propositions = {"a"};
  g.labels = {1};
  g.defender_actions = {"c"};
  g.adversary_actions = {"a"};
  g.defender_of = {{0}};
  g.adversary_of = {{0}};
  g.kernel = {{{Outcome{0, 1.0, {{1, 1.0}}}}}};
  return g;
}

bool has_code(const std::vector<Violation>& v, const std::string& code) {
  for (const auto& x : v)
    if (x.code == code) return true;
  return false;
}

class IdentityOracle : public DynamicsOracle {
 public:
  std::vector<double> sample_noise(std::mt19937_64&) const override { return {}; }
  OracleResult apply(const std::vector<double>& x, const std::vector<double>&, const std::vector<double>&,
                     const std::vector<double>&) const override {
    return {x, 1};
  }
};

// x' = x + uC - uA, noise free.
class ShiftOracle : public DynamicsOracle {
 public:
  std::vector<double> sample_noise(std::mt19937_64&) const override { return {}; }
  OracleResult apply(const std::vector<double>& x, const std::vector<double>& uc, const std::vector<double>& ua,
                     const std::vector<double>&) const override {
    return {{x[0] + uc[0] - ua[0]}, 1};
  }
};

// Lands in the left cell with probability `p`, otherwise in the right one.
class CoinOracle : public DynamicsOracle {
 public:
  explicit CoinOracle(double p) : p_(p) {}
  std::vector<double> sample_noise(std::mt19937_64& rng) const override {
    return {std::uniform_real_distribution<double>(0.0, 1.0)(rng)};
  }
  OracleResult apply(const std::vector<double>&, const std::vector<double>&, const std::vector<double>&,
                     const std::vector<double>& w) const override {
    return {{w[0] < p_ ? 0.5 : 1.5}, 1};
  }

 private:
  double p_;
};

InputAction point(const std::string& name, double v) { return {name, {v}, {v}}; }

AbstractionRequest line(std::size_t cells, std::vector<InputAction> uc, std::vector<InputAction> ua) {
  AbstractionRequest r;
  r.partition.variables = {"x"};
  r.partition.lo = {0.0};
  r.partition.hi = {static_cast<double>(cells)};
  r.partition.cells = {cells};
  r.partition.defender = std::move(uc);
  r.partition.adversary = std::move(ua);
  r.overflow = Overflow::Saturate;
  r.initial_point = {0.5};
  r.samples = 50;
  r.seed = 9;
  return r;
}

double mass(const std::vector<Outcome>& row, std::size_t to) {
  double m = 0;
  for (const auto& o : row)
    if (o.to == to) m += o.p;
  return m;
}

double max_row_error(const Dsg& g) {
  double err = 0;
  for (const auto& rows : g.kernel)
    for (const auto& row : rows) {
      double sum = 0;
      for (const auto& o : row) {
        sum += o.p;
        double d = 0;
        for (const auto& [t, q] : o.durations) d += q;
        err = std::max(err, std::abs(d - 1.0));
      }
      err = std::max(err, std::abs(sum - 1.0));
    }
  return err;
}

}  // namespace

TEST_CASE("validation reports broken invariants") {
  CHECK(validate(one_state()).empty());

  auto g = one_state();
  g.kernel[0][0][0].p = 0.98;
  CHECK(has_code(validate(g), "StochasticityViolation"));
  CHECK(error_code([&] { require_valid(g); }) == "StochasticityViolation");

  auto h = one_state();
  h.kernel[0][0][0].durations = {{0, 1.0}};
  CHECK(has_code(validate(h), "NonPositiveDuration"));

  auto e = one_state();
  e.defender_of = {{}};
  CHECK(!validate(e).empty());
}

TEST_CASE("identity dynamics give self-loops") {
  IdentityOracle o;
  auto req = line(4, {point("c0", 0), point("c1", 1)}, {point("a0", 0)});
  auto g = build_abstraction(o, req);
  CHECK(validate(g).empty());
  for (std::size_t s = 0; s < g.size(); ++s)
    for (std::size_t c = 0; c < g.nc(s); ++c)
      for (std::size_t a = 0; a < g.na(s); ++a) CHECK(mass(g.row(s, c, a), s) == 1.0);
}

TEST_CASE("shift dynamics on two unit cells") {
  ShiftOracle o;
  auto req = line(2, {point("c0", 0), point("c1", 1)}, {point("a0", 0), point("a1", 1)});
  auto g = build_abstraction(o, req);
  std::size_t cell1 = g.size(), cell2 = g.size();
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (g.states[s] == req.partition.cell_name(0)) cell1 = s;
    if (g.states[s] == req.partition.cell_name(1)) cell2 = s;
  }
  REQUIRE(cell1 < g.size());
  REQUIRE(cell2 < g.size());
  CHECK(mass(g.row(cell1, 1, 0), cell2) == 1.0);
  CHECK(mass(g.row(cell1, 1, 1), cell1) == 1.0);
  CHECK(mass(g.row(cell1, 0, 0), cell1) == 1.0);
}

TEST_CASE("two-tank abstraction has 49 cells and stochastic rows") {
  auto cfg = default_twotank();
  auto oracle = twotank_oracle(cfg);
  auto g = build_abstraction(*oracle, twotank_request(cfg, {"x1<=0.1", "x2<=0.3"}, 1, 2));
  CHECK(g.size() == 49);
  CHECK(validate(g).empty());
  CHECK(max_row_error(g) <= 1e-9);
}

TEST_CASE("abstraction is deterministic across runs and thread counts") {
  auto cfg = default_twotank();
  cfg.samples = 40;
  auto oracle = twotank_oracle(cfg);
  auto a = build_abstraction(*oracle, twotank_request(cfg, {"x1<=0.1"}, 3, 1));
  auto b = build_abstraction(*oracle, twotank_request(cfg, {"x1<=0.1"}, 3, 4));
  REQUIRE(a.size() == b.size());
  for (std::size_t s = 0; s < a.size(); ++s)
    for (std::size_t k = 0; k < a.kernel[s].size(); ++k) {
      REQUIRE(a.kernel[s][k].size() == b.kernel[s][k].size());
      for (std::size_t i = 0; i < a.kernel[s][k].size(); ++i) {
        CHECK(a.kernel[s][k][i].to == b.kernel[s][k][i].to);
        CHECK(a.kernel[s][k][i].p == b.kernel[s][k][i].p);
        CHECK(a.kernel[s][k][i].durations == b.kernel[s][k][i].durations);
      }
    }
}

TEST_CASE("empirical frequencies converge at the Monte-Carlo rate") {
  const double p = 0.3;
  CoinOracle o(p);
  double err_small = 0, err_large = 0;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    auto req = line(2, {point("c0", 0)}, {point("a0", 0)});
    req.seed = static_cast<std::uint64_t>(seed);
    req.samples = 100;
    auto small = build_abstraction(o, req);
    req.samples = 10000;
    auto large = build_abstraction(o, req);
    const double es = std::abs(mass(small.row(0, 0, 0), 0) - p);
    const double el = std::abs(mass(large.row(0, 0, 0), 0) - p);
    CHECK(es <= 5 * std::sqrt(p * (1 - p) / 100));
    CHECK(el <= 5 * std::sqrt(p * (1 - p) / 10000));
    err_small += es;
    err_large += el;
  }
  // Mean absolute error scales like 1/sqrt(N): a factor 10 between the sizes.
  const double ratio = err_small / err_large;
  CHECK(ratio > 4.0);
  CHECK(ratio < 25.0);
}

TEST_CASE("universal labelling of comparison atoms") {
  Partition p;
  p.variables = {"x"};
  p.lo = {0.0};
  p.hi = {20.0};
  p.cells = {2};
  CHECK(cell_satisfies("x<=10", p, 0));
  CHECK_FALSE(cell_satisfies("x<=10", p, 1));
  CHECK(cell_satisfies("x>=10", p, 1));
  CHECK_FALSE(cell_satisfies("x<=9", p, 0));
  CHECK(p.locate({10.0}) == std::optional<std::size_t>(0));
  CHECK(!p.locate({21.0}));
}
