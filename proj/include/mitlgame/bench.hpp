#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mitlgame/abstraction.hpp"
#include "mitlgame/mitl.hpp"
#include "mitlgame/sim.hpp"

namespace mitlgame {

// ---------------------------------------------------------------- traffic

enum class AttackLaw { Toggle, Block };

// Signalized network with queue-bearing links 0..L-1 (printed as x1..xL).
// Turns into links outside the modeled set leave the network.
struct TrafficConfig {
  std::vector<double> capacity;
  std::vector<double> flow;
  std::vector<double> arrival_mean;
  std::map<std::pair<std::size_t, std::size_t>, double> turn;  // (from, to) -> ratio, modeled links only
  double supply = 1.0;                                         // alpha, common to all link pairs
  std::vector<std::vector<std::vector<std::size_t>>> intersections;  // per intersection, actuable link subsets
  std::vector<std::size_t> cells;  // partition cells per link
  std::vector<double> initial;
  std::int64_t horizon = 5;
  std::size_t samples = 100;
  // Toggle: an attack flips the signal of the attacked subset, so attacking a
  // red subset turns it green. Block: an attack only turns a green subset red.
  AttackLaw attack = AttackLaw::Toggle;
};

// Four intersections, ten queue links; links 2, 3 and 4 split into three bins.
TrafficConfig default_traffic();
// Throws Error(Validation, "BadTrafficConfig").
void check(const TrafficConfig& cfg);

// Inputs: uC holds the chosen subset per intersection; uA holds 0 for no
// attack or j + 1 to attack subset j. A link moves only if its subset is
// green after the attack law is applied.
class TrafficOracle : public DynamicsOracle {
 public:
  explicit TrafficOracle(TrafficConfig cfg);
  std::vector<double> sample_noise(std::mt19937_64& rng) const override;  // Poisson arrivals per link
  OracleResult apply(const std::vector<double>& x, const std::vector<double>& uc, const std::vector<double>& ua,
                     const std::vector<double>& noise) const override;
  // Whole vehicle counts inside the cell.
  std::vector<double> sample_in_cell(const std::vector<double>& lo, const std::vector<double>& hi,
                                     std::mt19937_64& rng) const override;
  // Bitmask of green subsets per intersection after the attack.
  std::vector<std::uint32_t> realized(const std::vector<double>& uc, const std::vector<double>& ua) const;

 private:
  TrafficConfig cfg_;
};

std::unique_ptr<TrafficOracle> traffic_oracle(const TrafficConfig& cfg);

// Defender action index <-> chosen subset per intersection (intersection 0 is
// the least significant digit); adversary likewise with digits 0..k.
std::vector<std::size_t> traffic_defender_digits(const TrafficConfig& cfg, std::size_t action);
std::vector<std::size_t> traffic_adversary_digits(const TrafficConfig& cfg, std::size_t action);
std::size_t traffic_defender_index(const TrafficConfig& cfg, const std::vector<std::size_t>& digits);
std::size_t traffic_adversary_index(const TrafficConfig& cfg, const std::vector<std::size_t>& digits);

AbstractionRequest traffic_request(const TrafficConfig& cfg, const std::vector<std::string>& atoms,
                                   std::uint64_t seed, unsigned threads);

// Baseline 1: every intersection alternates its first and second subset,
// starting with the first. Baseline 2: always the first subset.
std::unique_ptr<DefenderPolicy> traffic_periodic_baseline(const TrafficConfig& cfg);
std::unique_ptr<DefenderPolicy> traffic_always_green_baseline(const TrafficConfig& cfg);

// Attacks, at every intersection, the subset the defender's committed policy
// plays with the highest probability, and shows the true valuation.
std::unique_ptr<AdversaryPolicy> traffic_counter_adversary(const TrafficConfig& cfg);

// Rows of 'G'/'R' per intersection: 'G' when the intersection's first subset
// (its main link) was green after the attack.
std::vector<std::string> signal_table(const TrafficConfig& cfg, const Rollout& r, std::size_t ticks);

// ---------------------------------------------------------------- two tanks

// x' = A x + B (uC + uA) + w on [lo, hi]^2, levels saturating at the box.
struct TwoTankConfig {
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> b;  // 2 x 1: one scalar input
  std::vector<double> control_levels;
  std::vector<double> adversary_levels;
  double noise_variance = 1.5e-5;
  std::vector<double> lo, hi;
  std::vector<std::size_t> cells;
  std::vector<double> initial;
  std::size_t samples = 200;
};

// Calibrated defaults; the input drives a pump from tank 2 into tank 1.
TwoTankConfig default_twotank();
void check(const TwoTankConfig& cfg);
std::unique_ptr<LinearOracle> twotank_oracle(const TwoTankConfig& cfg);
AbstractionRequest twotank_request(const TwoTankConfig& cfg, const std::vector<std::string>& atoms,
                                   std::uint64_t seed, unsigned threads);

// ---------------------------------------------------------------- specs

struct NamedSpec {
  std::string name;
  std::string text;
  Vocabulary vocabulary;
  FormulaPtr formula;
};

// phi1, phi2, phi3 over the traffic links and phi_twotank over the tanks.
std::vector<NamedSpec> builtin_specs();
const NamedSpec& builtin_spec(const std::string& name);

}  // namespace mitlgame
