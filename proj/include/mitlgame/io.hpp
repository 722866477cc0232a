#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mitlgame/bench.hpp"
#include "mitlgame/dsg.hpp"
#include "mitlgame/fsc.hpp"
#include "mitlgame/gamec.hpp"
#include "mitlgame/gdsg.hpp"
#include "mitlgame/mitl.hpp"
#include "mitlgame/sim.hpp"
#include "mitlgame/solver.hpp"
#include "mitlgame/tba.hpp"

namespace mitlgame {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class ModelKind { Explicit, Abstraction, Benchmark };

// A parsed model file (schema 1). See docs/model-schema.md.
struct ModelFile {
  Json source;
  ModelKind kind = ModelKind::Explicit;
  std::uint64_t seed = 0;
  std::optional<std::string> spec;        // MITL text
  std::optional<Json> tba;                // explicit automaton, replaces the formula's automaton
  GdsgOptions game;
  double epsilon = 1e-6;
  TargetMode target = TargetMode::GamecUnion;
  std::int64_t horizon = 0;               // simulation horizon in ticks; 0 derives it from the formula
  std::size_t rollouts = 1000;
  std::size_t passive_action = 0;         // adversary action meaning "no attack"

  // Explicit kind.
  std::optional<Dsg> dsg;
  // Abstraction kind.
  std::optional<AbstractionRequest> request;
  std::optional<Json> dynamics;
  // Benchmark kind.
  std::string benchmark;                  // "traffic" or "twotank"
  std::optional<TrafficConfig> traffic;
  std::optional<TwoTankConfig> twotank;
};

// Throws Error(Validation, "SchemaError") with a JSON path on malformed input,
// and the DSG validation codes for an explicit game that fails validation.
ModelFile parse_model(const Json& j);
ModelFile load_model(const std::string& path);

// Names the formula may use: propositions of an explicit game, state variables otherwise.
Vocabulary model_vocabulary(const ModelFile& m);

// The game the model describes. Abstraction and benchmark kinds label cells
// with `atoms` (comparison atoms).
Dsg build_model_dsg(const ModelFile& m, const std::vector<std::string>& atoms, unsigned threads);

Json dsg_to_json(const Dsg& g);
Dsg dsg_from_json(const Json& j, const std::string& path = "$");

Json tba_to_json(const TimedBuchiAutomaton& a);
TimedBuchiAutomaton tba_from_json(const Json& j, const std::string& path = "$");

// Controller tables keyed by DSG state and action names.
Json policy_to_json(const FiniteStateController& fsc, const Dsg& g, const TimedBuchiAutomaton& a);
FiniteStateController policy_from_json(const Json& j, const Dsg& g, const TimedBuchiAutomaton& a);

Json gamecs_to_json(const GamecSet& set, const Game& z);

// Product states with their local action counts and successor rows.
Json product_to_json(const ProductGame& p, const Dsg& g, const TimedBuchiAutomaton& a);
// Global states with their adversary columns and (row, column) successor blocks.
Json global_to_json(const GlobalGame& gg);

// RFC 4180: CRLF line ends; fields with comma, quote or line breaks are quoted.
std::string csv_field(const std::string& s);
std::string csv_line(const std::vector<std::string>& fields);
// Shortest round-trip decimal form.
std::string format_double(double x);

std::string rollout_csv(const Rollout& r, const Dsg& g);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace mitlgame
