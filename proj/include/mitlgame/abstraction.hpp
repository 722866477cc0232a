#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mitlgame/dsg.hpp"

namespace mitlgame {

struct OracleResult {
  std::vector<double> x;
  std::int64_t duration = 1;  // ticks, must be positive
};

// Black-box one-step dynamics x' = f(x, uC, uA, w) plus samplers.
class DynamicsOracle {
 public:
  virtual ~DynamicsOracle() = default;
  virtual std::vector<double> sample_noise(std::mt19937_64& rng) const = 0;
  virtual OracleResult apply(const std::vector<double>& x, const std::vector<double>& uc,
                             const std::vector<double>& ua, const std::vector<double>& noise) const = 0;
  // Uniform point in the axis-aligned cell [lo, hi].
  virtual std::vector<double> sample_in_cell(const std::vector<double>& lo, const std::vector<double>& hi,
                                             std::mt19937_64& rng) const;
};

// x' = A x + B (uC + uA) + w with w ~ N(0, noise_variance * I), duration 1.
class LinearOracle : public DynamicsOracle {
 public:
  LinearOracle(std::vector<std::vector<double>> a, std::vector<std::vector<double>> b, double noise_variance);
  std::vector<double> sample_noise(std::mt19937_64& rng) const override;
  OracleResult apply(const std::vector<double>& x, const std::vector<double>& uc, const std::vector<double>& ua,
                     const std::vector<double>& noise) const override;

 private:
  std::vector<std::vector<double>> a_, b_;
  double noise_variance_;
};

// Box partition; an action is a box of inputs sampled uniformly (a point when lo == hi).
struct InputAction {
  std::string name;
  std::vector<double> lo, hi;
};

enum class Overflow { Sink, Saturate, Error };

struct Partition {
  std::vector<std::string> variables;
  std::vector<double> lo, hi;
  std::vector<std::size_t> cells;  // per axis
  std::vector<InputAction> defender, adversary;

  std::size_t cell_count() const;
  // Per-axis cell bounds of flat cell index i (axis 0 varies fastest).
  void bounds(std::size_t i, std::vector<double>& lo_out, std::vector<double>& hi_out) const;
  // Flat index of x; boundaries belong to the lower-index cell. nullopt outside the box.
  std::optional<std::size_t> locate(const std::vector<double>& x) const;
  std::vector<double> clamp(const std::vector<double>& x) const;
  std::string cell_name(std::size_t i) const;
};

struct AbstractionRequest {
  Partition partition;
  std::vector<std::string> atoms;  // comparison atoms such as "x2<=10" used as labels
  std::size_t samples = 100;       // per (cell, uC, uA) triple
  std::uint64_t seed = 0;
  Overflow overflow = Overflow::Sink;
  std::vector<double> initial_point;
  unsigned threads = 1;
  // Optional input equivalence: pairs (uC, uA) with equal class realize the
  // same inputs, so they share the distribution sampled for the first pair.
  std::function<std::uint64_t(std::size_t c, std::size_t a)> input_class;
};

inline constexpr const char* kOverflowState = "__overflow";

// Universal labelling: the atom holds on the cell iff it holds at every point.
bool cell_satisfies(const std::string& atom, const Partition& p, std::size_t cell);

// Monte-Carlo abstraction into a DSG. Each triple draws from its own stream
// seeded by derive_seed(seed, triple index), so results are independent of the
// thread count.
Dsg build_abstraction(const DynamicsOracle& oracle, const AbstractionRequest& req);

}  // namespace mitlgame
