#include "mitlgame/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mitlgame/error.hpp"
#include "mitlgame/mitl.hpp"
#include "mitlgame/parallel.hpp"

namespace mitlgame {

namespace {
constexpr double kTol = 1e-9;

std::vector<double> sample_box(const std::vector<double>& lo, const std::vector<double>& hi, std::mt19937_64& rng) {
  std::vector<double> x(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (hi[i] > lo[i]) {
      std::uniform_real_distribution<double> d(lo[i], hi[i]);
      x[i] = d(rng);
    } else {
      x[i] = lo[i];
    }
  }
  return x;
}
}  // namespace

std::vector<double> DynamicsOracle::sample_in_cell(const std::vector<double>& lo, const std::vector<double>& hi,
                                                   std::mt19937_64& rng) const {
  return sample_box(lo, hi, rng);
}

LinearOracle::LinearOracle(std::vector<std::vector<double>> a, std::vector<std::vector<double>> b,
                           double noise_variance)
    : a_(std::move(a)), b_(std::move(b)), noise_variance_(noise_variance) {
  const std::size_t n = a_.size();
  for (const auto& r : a_)
    if (r.size() != n) throw validation_error("BadOracle", "A must be square");
  if (b_.size() != n) throw validation_error("BadOracle", "B must have one row per state variable");
  if (noise_variance_ < 0) throw validation_error("BadOracle", "noise variance must be non-negative");
}

std::vector<double> LinearOracle::sample_noise(std::mt19937_64& rng) const {
  std::vector<double> w(a_.size(), 0.0);
  if (noise_variance_ == 0) return w;
  std::normal_distribution<double> d(0.0, std::sqrt(noise_variance_));
  for (auto& x : w) x = d(rng);
  return w;
}

OracleResult LinearOracle::apply(const std::vector<double>& x, const std::vector<double>& uc,
                                 const std::vector<double>& ua, const std::vector<double>& noise) const {
  OracleResult r;
  r.x.assign(a_.size(), 0.0);
  for (std::size_t i = 0; i < a_.size(); ++i) {
    double v = noise[i];
    for (std::size_t j = 0; j < x.size(); ++j) v += a_[i][j] * x[j];
    for (std::size_t j = 0; j < b_[i].size(); ++j)
      v += b_[i][j] * ((j < uc.size() ? uc[j] : 0.0) + (j < ua.size() ? ua[j] : 0.0));
    r.x[i] = v;
  }
  return r;
}

std::size_t Partition::cell_count() const {
  std::size_t n = 1;
  for (auto c : cells) n *= c;
  return n;
}

void Partition::bounds(std::size_t i, std::vector<double>& lo_out, std::vector<double>& hi_out) const {
  lo_out.resize(cells.size());
  hi_out.resize(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::size_t idx = i % cells[k];
    i /= cells[k];
    double w = (hi[k] - lo[k]) / static_cast<double>(cells[k]);
    lo_out[k] = lo[k] + w * static_cast<double>(idx);
    hi_out[k] = idx + 1 == cells[k] ? hi[k] : lo[k] + w * static_cast<double>(idx + 1);
  }
}

std::optional<std::size_t> Partition::locate(const std::vector<double>& x) const {
  std::size_t flat = 0, stride = 1;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!(x[k] >= lo[k] - kTol) || !(x[k] <= hi[k] + kTol)) return std::nullopt;
    double w = (hi[k] - lo[k]) / static_cast<double>(cells[k]);
    double pos = (x[k] - lo[k]) / w;
    auto idx = static_cast<std::int64_t>(std::ceil(pos - kTol)) - 1;
    idx = std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(cells[k]) - 1);
    flat += static_cast<std::size_t>(idx) * stride;
    stride *= cells[k];
  }
  return flat;
}

std::vector<double> Partition::clamp(const std::vector<double>& x) const {
  std::vector<double> y = x;
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = std::clamp(y[k], lo[k], hi[k]);
  return y;
}

std::string Partition::cell_name(std::size_t i) const {
  std::string s = "cell";
  for (std::size_t k = 0; k < cells.size(); ++k) {
    s += "_" + std::to_string(i % cells[k]);
    i /= cells[k];
  }
  return s;
}

bool cell_satisfies(const std::string& atom, const Partition& p, std::size_t cell) {
  auto cmp = parse_comparison_atom(atom);
  if (!cmp) throw validation_error("UndeclaredAtom", "'" + atom + "' is not a comparison over a state variable");
  auto it = std::find(p.variables.begin(), p.variables.end(), cmp->variable);
  if (it == p.variables.end()) throw validation_error("UndeclaredAtom", "unknown state variable '" + cmp->variable + "'");
  const auto k = static_cast<std::size_t>(it - p.variables.begin());
  std::vector<double> lo, hi;
  p.bounds(cell, lo, hi);
  // Cells are (lo, hi] except the first on each axis, which also holds lo.
  std::size_t rest = cell;
  for (std::size_t j = 0; j < k; ++j) rest /= p.cells[j];
  const bool lower_closed = rest % p.cells[k] == 0;
  const double th = cmp->threshold;
  if (cmp->relation == "<=") return hi[k] <= th + kTol;
  if (cmp->relation == "<") return hi[k] < th - kTol;
  if (cmp->relation == ">=") return lo[k] >= th - kTol;
  return lower_closed ? lo[k] > th + kTol : lo[k] >= th - kTol;
}

Dsg build_abstraction(const DynamicsOracle& oracle, const AbstractionRequest& req) {
  const Partition& part = req.partition;
  const std::size_t dims = part.variables.size();
  if (dims == 0 || part.lo.size() != dims || part.hi.size() != dims || part.cells.size() != dims)
    throw validation_error("BadPartition", "box, cell counts and variables must have equal length");
  for (std::size_t k = 0; k < dims; ++k) {
    if (!(part.lo[k] < part.hi[k])) throw validation_error("BadPartition", "empty box on axis " + std::to_string(k));
    if (part.cells[k] == 0) throw validation_error("BadPartition", "zero cells on axis " + std::to_string(k));
  }
  if (part.defender.empty() || part.adversary.empty())
    throw validation_error("EmptyActionSet", "both players need at least one input action");
  if (req.samples == 0) throw validation_error("BadSampleCount", "samples per triple must be at least 1");

  const std::size_t ncell = part.cell_count();
  const bool sink = req.overflow == Overflow::Sink;
  const std::size_t nstate = ncell + (sink ? 1 : 0);
  const std::size_t nc = part.defender.size(), na = part.adversary.size();

  Dsg g;
  for (std::size_t i = 0; i < ncell; ++i) g.states.push_back(part.cell_name(i));
  if (sink) g.states.push_back(kOverflowState);
  g.propositions = req.atoms;
  if (sink) g.propositions.push_back(kOverflowState);
  if (g.propositions.size() > 64) throw validation_error("TooManyPropositions", "at most 64 propositions");
  for (const auto& a : part.defender) g.defender_actions.push_back(a.name);
  for (const auto& a : part.adversary) g.adversary_actions.push_back(a.name);
  std::vector<std::size_t> all_c(nc), all_a(na);
  for (std::size_t i = 0; i < nc; ++i) all_c[i] = i;
  for (std::size_t i = 0; i < na; ++i) all_a[i] = i;
  g.defender_of.assign(nstate, all_c);
  g.adversary_of.assign(nstate, all_a);
  g.labels.assign(nstate, 0);
  for (std::size_t i = 0; i < ncell; ++i)
    for (std::size_t b = 0; b < req.atoms.size(); ++b)
      if (cell_satisfies(req.atoms[b], part, i)) g.labels[i] |= std::uint64_t{1} << b;
  if (sink) g.labels[ncell] = std::uint64_t{1} << req.atoms.size();
  g.kernel.assign(nstate, std::vector<std::vector<Outcome>>(nc * na));

  // rep[c * na + a]: the first input pair of the same class.
  std::vector<std::size_t> rep(nc * na);
  {
    std::map<std::uint64_t, std::size_t> first;
    for (std::size_t k = 0; k < nc * na; ++k)
      rep[k] = req.input_class ? first.emplace(req.input_class(k / na, k % na), k).first->second : k;
  }
  const std::size_t ntriples = ncell * nc * na;
  parallel_for(ntriples, req.threads, [&](std::size_t t) {
    const std::size_t cell = t / (nc * na), c = (t / na) % nc, a = t % na;
    if (rep[c * na + a] != c * na + a) return;
    std::mt19937_64 rng(derive_seed(req.seed, t));
    std::vector<double> lo, hi;
    part.bounds(cell, lo, hi);
    std::map<std::size_t, std::map<std::int64_t, std::size_t>> counts;
    std::size_t valid = 0;
    for (std::size_t k = 0; k < req.samples; ++k) {
      auto x = oracle.sample_in_cell(lo, hi, rng);
      auto uc = sample_box(part.defender[c].lo, part.defender[c].hi, rng);
      auto ua = sample_box(part.adversary[a].lo, part.adversary[a].hi, rng);
      auto w = oracle.sample_noise(rng);
      OracleResult r = oracle.apply(x, uc, ua, w);
      if (r.duration <= 0)
        throw validation_error("NonPositiveDuration", "oracle returned duration " + std::to_string(r.duration));
      if (r.x.size() != dims || !std::all_of(r.x.begin(), r.x.end(), [](double v) { return std::isfinite(v); }))
        continue;
      std::optional<std::size_t> to = part.locate(r.x);
      if (!to) {
        if (req.overflow == Overflow::Error)
          throw runtime_error("OracleRange", "successor leaves the box from " + part.cell_name(cell));
        to = sink ? std::optional<std::size_t>(ncell) : part.locate(part.clamp(r.x));
      }
      ++counts[*to][r.duration];
      ++valid;
    }
    if (valid == 0) throw runtime_error("EmptyCellSample", "no valid successor sampled from " + part.cell_name(cell));
    auto& row = g.kernel[cell][c * na + a];
    for (const auto& [to, by_duration] : counts) {
      Outcome o;
      o.to = to;
      std::size_t total = 0;
      for (const auto& [d, n] : by_duration) total += n;
      o.p = static_cast<double>(total) / static_cast<double>(valid);
      for (const auto& [d, n] : by_duration)
        o.durations.emplace_back(d, static_cast<double>(n) / static_cast<double>(total));
      row.push_back(std::move(o));
    }
  });
  for (std::size_t cell = 0; cell < ncell; ++cell)
    for (std::size_t k = 0; k < nc * na; ++k)
      if (rep[k] != k) g.kernel[cell][k] = g.kernel[cell][rep[k]];
  if (sink)
    for (auto& row : g.kernel[ncell]) row = {Outcome{ncell, 1.0, {{1, 1.0}}}};

  if (req.initial_point.empty()) {
    g.initial = 0;
  } else {
    if (req.initial_point.size() != dims) throw validation_error("BadInitialState", "initial point has wrong dimension");
    auto at = part.locate(req.initial_point);
    if (!at) throw validation_error("BadInitialState", "initial point lies outside the box");
    g.initial = *at;
  }
  require_valid(g);
  return g;
}

}  // namespace mitlgame
