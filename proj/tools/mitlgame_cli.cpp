#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mitlgame/bench.hpp"
#include "mitlgame/error.hpp"
#include "mitlgame/io.hpp"
#include "mitlgame/parallel.hpp"
#include "mitlgame/pipeline.hpp"
#include "mitlgame/sim.hpp"

namespace fs = std::filesystem;
using namespace mitlgame;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct Options {
  std::string model;
  std::optional<std::string> spec;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out = "out";
  bool emit_gamecs = false;
  std::optional<std::string> target;
  std::string benchmark;
  std::optional<std::int64_t> kappa_max;
  std::optional<std::int64_t> fsc_size;
  std::optional<std::string> detect_threshold;
  // synthesize / gamecs
  bool emit_product = false;
  bool emit_global = false;
  std::string policy_out;
  // simulate
  std::string policy;
  std::string baseline;
  std::string adversary = "best-response";
  std::string adversary_file;
  std::optional<std::size_t> rollouts;
  std::optional<std::int64_t> horizon;
  std::size_t trajectories = 1;
  bool exact_interval = false;
};

// Writes outputs into one directory and records their hashes for the manifest.
class OutputDir {
 public:
  OutputDir(std::string dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
    fs::create_directories(dir_);
  }
  void write(const std::string& name, const std::string& content) {
    write_file((fs::path(dir_) / name).string(), content);
    Json e;
    e["file"] = name;
    e["sha256"] = sha256_hex(content);
    e["bytes"] = content.size();
    files_.push_back(e);
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }
  void manifest(const Options& opt, const ModelFile& m, std::uint64_t seed, const StageTimer& timer) {
    Json j;
    j["tool_version"] = kToolVersion;
    j["schema"] = kSchemaVersion;
    j["command"] = command_;
    Json cfg;
    cfg["model_path"] = opt.model;
    cfg["benchmark"] = opt.benchmark;
    cfg["kappa_max"] = m.game.kappa_max;
    cfg["fsc_size"] = m.game.fsc_size;
    cfg["detect_threshold"] = m.game.detect_threshold ? Json(*m.game.detect_threshold) : Json(nullptr);
    cfg["model"] = m.source;
    cfg["spec"] = opt.spec ? Json(*opt.spec) : Json(nullptr);
    cfg["threads"] = opt.threads;
    cfg["target"] = opt.target ? Json(*opt.target) : Json(nullptr);
    if (command_ == "simulate") {
      cfg["policy"] = opt.policy;
      cfg["baseline"] = opt.baseline;
      cfg["adversary"] = opt.adversary;
      cfg["adversary_file"] = opt.adversary_file;
      cfg["exact_interval"] = opt.exact_interval;
    }
    j["configuration"] = cfg;
    j["seed"] = seed;
    j["outputs"] = files_;
    Json t = Json::object();
    for (const auto& [stage, secs] : timer.stages()) t[stage] = secs;
    j["timings_seconds"] = t;
    write_file((fs::path(dir_) / "manifest.json").string(), j.dump(2) + "\n");
  }

 private:
  std::string dir_, command_;
  Json files_ = Json::array();
};

ModelFile load(const Options& opt, std::uint64_t& seed) {
  if (opt.model.empty() && opt.benchmark.empty()) throw validation_error("BadFlag", "give a model file or --benchmark");
  ModelFile m = opt.model.empty()
                    ? parse_model(Json{{"schema", kSchemaVersion},
                                       {"model", {{"kind", "benchmark"}, {"name", opt.benchmark}}}})
                    : load_model(opt.model);
  if (opt.kappa_max) {
    if (*opt.kappa_max < 0) throw validation_error("BadFlag", "--kappa-max must be non-negative");
    m.game.kappa_max = *opt.kappa_max;
  }
  if (opt.fsc_size) {
    if (*opt.fsc_size < 0) throw validation_error("BadFlag", "--fsc-size must be non-negative");
    m.game.fsc_size = *opt.fsc_size;
  }
  if (opt.detect_threshold) {
    if (*opt.detect_threshold == "off") {
      m.game.detect_threshold = std::nullopt;
    } else {
      try {
        std::size_t used = 0;
        const double t = std::stod(*opt.detect_threshold, &used);
        if (used != opt.detect_threshold->size() || !(t >= 0)) throw std::invalid_argument("threshold");
        m.game.detect_threshold = t;
      } catch (const std::logic_error&) {
        throw validation_error("BadFlag", "--detect-threshold expects a non-negative number or 'off'");
      }
    }
  }
  if (opt.seed) m.seed = *opt.seed;
  seed = m.seed;
  if (opt.target) {
    if (*opt.target == "gamec") m.target = TargetMode::GamecUnion;
    else if (*opt.target == "accepting") m.target = TargetMode::Accepting;
    else throw validation_error("BadFlag", "--target expects 'gamec' or 'accepting'");
  }
  m.game.threads = opt.threads;
  return m;
}

SynthesisOptions synthesis_options(const ModelFile& m, unsigned threads) {
  SynthesisOptions s;
  s.game = m.game;
  s.game.threads = threads;
  s.vi.epsilon = m.epsilon;
  s.vi.target = m.target;
  s.vi.threads = threads;
  return s;
}

void warn_if_empty(const GamecSet& gamecs) {
  if (gamecs.components.empty())
    spdlog::warn("no accepting end component exists; every state has value 0");
}

int cmd_abstract(const Options& opt) {
  std::uint64_t seed = 0;
  const ModelFile m = load(opt, seed);
  StageTimer timer;
  std::vector<std::string> atoms;
  if (opt.spec || m.spec) {
    const Problem pr = load_problem(m, opt.spec, opt.threads, &timer);
    OutputDir out(opt.out, "abstract");
    out.write_json("dsg.json", dsg_to_json(pr.dsg));
    out.manifest(opt, m, seed, timer);
    spdlog::info("abstraction: {} states", pr.dsg.size());
    return 0;
  }
  const Dsg g = timer.run("abstraction", [&] { return build_model_dsg(m, atoms, opt.threads); });
  OutputDir out(opt.out, "abstract");
  out.write_json("dsg.json", dsg_to_json(g));
  out.manifest(opt, m, seed, timer);
  spdlog::info("abstraction: {} states", g.size());
  return 0;
}

int cmd_synthesize(const Options& opt) {
  std::uint64_t seed = 0;
  const ModelFile m = load(opt, seed);
  StageTimer timer;
  const Problem pr = load_problem(m, opt.spec, opt.threads, &timer);
  const Synthesis syn = synthesize(pr.dsg, pr.tba, synthesis_options(m, opt.threads), &timer);
  warn_if_empty(syn.gamecs);
  const Game& z = syn.global.game;

  OutputDir out(opt.out, "synthesize");
  const Json policy = policy_to_json(syn.extraction.fsc, pr.dsg, pr.tba);
  out.write_json("policy.json", policy);
  if (!opt.policy_out.empty()) write_file(opt.policy_out, policy.dump(2) + "\n");
  std::string values = csv_line({"state", "value", "target"});
  for (std::size_t s = 0; s < z.size(); ++s)
    values += csv_line({z.names[s], format_double(syn.vi.q[s]), syn.vi.target[s] ? "1" : "0"});
  out.write("values.csv", values);
  std::string trace = csv_line({"iteration", "sup_norm_change"});
  for (std::size_t i = 0; i < syn.vi.trace.size(); ++i)
    trace += csv_line({std::to_string(i + 1), format_double(syn.vi.trace[i])});
  out.write("trace.csv", trace);
  if (opt.emit_gamecs) out.write_json("gamecs.json", gamecs_to_json(syn.gamecs, z));
  if (opt.emit_product) out.write_json("product.json", product_to_json(syn.product, pr.dsg, pr.tba));
  if (opt.emit_global) out.write_json("global.json", global_to_json(syn.global));

  Json summary;
  summary["spec"] = pr.spec_text;
  summary["value"] = syn.value;
  summary["iterations"] = syn.vi.iterations;
  summary["monotone"] = syn.vi.monotone;
  summary["bounded"] = syn.vi.bounded;
  summary["dsg_states"] = pr.dsg.size();
  summary["product_states"] = syn.product.states.size();
  summary["global_states"] = z.size();
  summary["gamecs"] = syn.gamecs.components.size();
  summary["policy_conflicts"] = syn.extraction.conflicts;
  summary["empty_gamec"] = syn.gamecs.components.empty();
  out.write_json("summary.json", summary);
  out.manifest(opt, m, seed, timer);
  std::cout << "value " << format_double(syn.value) << " after " << syn.vi.iterations << " iterations\n";
  return 0;
}

int cmd_gamecs(const Options& opt) {
  std::uint64_t seed = 0;
  const ModelFile m = load(opt, seed);
  StageTimer timer;
  const Problem pr = load_problem(m, opt.spec, opt.threads, &timer);
  const auto [p, gg] = build_games(pr.dsg, pr.tba, synthesis_options(m, opt.threads).game, &timer);
  const GamecSet gamecs = timer.run("gamec", [&] { return compute_gamecs(gg.game); });
  warn_if_empty(gamecs);
  OutputDir out(opt.out, "gamecs");
  out.write_json("gamecs.json", gamecs_to_json(gamecs, gg.game));
  if (opt.emit_product) out.write_json("product.json", product_to_json(p, pr.dsg, pr.tba));
  if (opt.emit_global) out.write_json("global.json", global_to_json(gg));
  out.manifest(opt, m, seed, timer);
  std::cout << gamecs.components.size() << " accepting end components\n";
  return 0;
}

int cmd_simulate(const Options& opt) {
  std::uint64_t seed = 0;
  const ModelFile m = load(opt, seed);
  StageTimer timer;
  const Problem pr = load_problem(m, opt.spec, opt.threads, &timer);
  if (!pr.formula) throw validation_error("MissingSpec", "simulation evaluates an MITL specification");
  const auto [p, gg] = build_games(pr.dsg, pr.tba, synthesis_options(m, opt.threads).game, &timer);

  std::optional<FiniteStateController> fsc;
  std::unique_ptr<DefenderPolicy> defender;
  if (!opt.baseline.empty()) {
    if (!m.traffic) throw validation_error("BadFlag", "--baseline needs the traffic benchmark");
    if (opt.baseline == "periodic") defender = traffic_periodic_baseline(*m.traffic);
    else if (opt.baseline == "always-green") defender = traffic_always_green_baseline(*m.traffic);
    else throw validation_error("BadFlag", "--baseline expects 'periodic' or 'always-green'");
  } else {
    if (opt.policy.empty()) throw validation_error("BadFlag", "give --policy or --baseline");
    Json pj;
    try {
      pj = Json::parse(read_file(opt.policy));
    } catch (const nlohmann::json::parse_error& e) {
      throw validation_error("SchemaError", opt.policy + ": " + e.what());
    }
    fsc = policy_from_json(pj, pr.dsg, pr.tba);
    fsc->check([&](std::size_t s) { return pr.dsg.nc(s); });
    defender = std::make_unique<ControllerPolicy>(*fsc);
  }

  std::unique_ptr<AdversaryPolicy> adversary;
  if (opt.adversary == "passive") {
    adversary = std::make_unique<PassiveAdversary>(m.passive_action);
  } else if (opt.adversary == "best-response") {
    if (fsc) {
      const GamecSet gamecs = timer.run("gamec", [&] { return compute_gamecs(gg.game); });
      const auto target = m.target == TargetMode::GamecUnion ? reachability_targets(gamecs, gg.game.size())
                                                             : reachability_targets(gg.game, TargetMode::Accepting);
      const BestResponse br = timer.run("best_response", [&] {
        return best_response(gg.game, target, controller_rows(gg, p, *fsc));
      });
      adversary = std::make_unique<TableAdversary>(br.columns);
    } else {
      adversary = traffic_counter_adversary(*m.traffic);
    }
  } else if (opt.adversary == "file") {
    const Json aj = Json::parse(read_file(opt.adversary_file));
    if (!aj.is_object() || !aj.contains("columns") || !aj["columns"].is_array())
      throw validation_error("SchemaError", opt.adversary_file + ": expected {\"columns\": [...]}");
    ColumnPolicy cols;
    for (const auto& c : aj["columns"]) cols.push_back(c.get<std::size_t>());
    if (cols.size() != gg.game.size())
      throw validation_error("SchemaError", opt.adversary_file + ": one column per global state is required");
    for (std::size_t s = 0; s < cols.size(); ++s)
      if (cols[s] >= gg.game.cols[s]) throw validation_error("SchemaError", "column out of range at state " + std::to_string(s));
    adversary = std::make_unique<TableAdversary>(cols);
  } else {
    throw validation_error("BadFlag", "--adversary expects 'passive', 'best-response' or 'file'");
  }

  EstimateOptions eo;
  eo.rollouts = opt.rollouts ? *opt.rollouts : m.rollouts;
  eo.horizon = opt.horizon ? *opt.horizon : (m.horizon > 0 ? m.horizon : simulation_horizon(*pr.formula));
  eo.seed = seed;
  eo.threads = opt.threads;
  eo.exact_interval = opt.exact_interval;
  const Simulator sim(pr.dsg, pr.tba, p, gg);
  const SatisfactionEstimate est =
      timer.run("rollouts", [&] { return estimate_satisfaction(sim, *defender, *adversary, pr.formula, eo); });

  OutputDir out(opt.out, "simulate");
  const std::size_t keep = std::min(opt.trajectories, eo.rollouts);
  for (std::size_t i = 0; i < keep; ++i) {
    const Rollout r = sim.rollout(*defender, *adversary, eo.horizon, derive_seed(seed, i));
    char name[64];
    std::snprintf(name, sizeof name, "trajectory_%04zu.csv", i);
    out.write(name, rollout_csv(r, pr.dsg));
  }
  Json summary;
  summary["spec"] = pr.spec_text;
  summary["rollouts"] = est.n;
  summary["horizon"] = eo.horizon;
  summary["satisfied"] = est.satisfied;
  summary["violated"] = est.violated;
  summary["inconclusive"] = est.inconclusive;
  summary["p_hat"] = est.p_hat;
  summary["half_width"] = est.half_width;
  summary["interval"] = Json::array({est.lower, est.upper});
  summary["interval_method"] = opt.exact_interval ? "clopper-pearson" : "normal";
  summary["adversary"] = opt.adversary;
  out.write_json("summary.json", summary);
  out.manifest(opt, m, seed, timer);
  std::cout << "p_hat " << format_double(est.p_hat) << " +/- " << format_double(est.half_width) << "\n";
  return 0;
}

int cmd_check_spec(const Options& opt) {
  Vocabulary vocab;
  std::optional<std::string> spec = opt.spec;
  if (!opt.model.empty()) {
    std::uint64_t seed = 0;
    const ModelFile m = load(opt, seed);
    vocab = model_vocabulary(m);
    if (!spec) spec = m.spec;
  } else {
    for (int i = 1; i <= 10; ++i) vocab.variables.insert("x" + std::to_string(i));
  }
  if (!spec) throw validation_error("MissingSpec", "check-spec needs --spec or a model with a spec");
  std::string text = *spec;
  for (const auto& b : builtin_specs())
    if (b.name == text) text = b.text;
  const FormulaPtr f = parse_mitl(text, vocab);
  const TimedBuchiAutomaton a = automaton_for(f);
  Json j;
  j["formula"] = to_string(*f);
  j["normalized"] = to_string(*normalize(f));
  j["atoms"] = atoms_of(*f);
  const auto bound = horizon_bound(*f);
  j["horizon_bound"] = bound ? Json(bound->str()) : Json(nullptr);
  j["automaton"] = tba_to_json(a);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("mitlgame");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Stochastic game synthesis for MITL specifications under actuator and timing attacks"};
  app.require_subcommand(1);
  Options opt;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto common = [&](CLI::App* sub, bool needs_model) {
    auto* mo = sub->add_option("model", opt.model, "Model file (JSON, schema 1)");
    if (needs_model) {
      auto* bench = sub->add_option("--benchmark", opt.benchmark, "Built-in benchmark with default parameters instead of a model file")
                        ->check(CLI::IsMember({"traffic", "twotank"}));
      mo->excludes(bench);
      bench->excludes(mo);
      sub->add_option("--kappa-max", opt.kappa_max, "Timestamp shift budget of the adversary");
      sub->add_option("--fsc-size", opt.fsc_size, "Controller estimate values per clock (0 = full grid)");
      sub->add_option("--detect-threshold", opt.detect_threshold, "Detection threshold in ticks, or 'off'");
    }
    sub->add_option("--spec", opt.spec, "MITL specification or a built-in name (phi1, phi2, phi3, phi_twotank)");
    sub->add_option("--seed", opt.seed, "Overrides the model's seed");
    sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--target", opt.target, "Value-iteration target: gamec or accepting");
  };
  auto* abstract = app.add_subcommand("abstract", "Build the DSG of a model");
  common(abstract, true);
  auto* synth = app.add_subcommand("synthesize", "Synthesize a controller and its value");
  common(synth, true);
  synth->add_flag("--emit-gamecs", opt.emit_gamecs, "Also write the accepting end components");
  synth->add_flag("--emit-product", opt.emit_product, "Also write the product game");
  synth->add_flag("--emit-global", opt.emit_global, "Also write the global game");
  synth->add_option("--policy-out", opt.policy_out, "Extra copy of the policy file at this path");
  auto* simulate = app.add_subcommand("simulate", "Estimate the satisfaction probability by rollouts");
  common(simulate, true);
  simulate->add_option("--policy,--policy-in", opt.policy, "Policy file written by synthesize");
  simulate->add_option("--baseline", opt.baseline, "Traffic baseline instead of a policy: periodic or always-green");
  simulate->add_option("--adversary", opt.adversary, "passive, best-response or file");
  simulate->add_option("--adversary-file", opt.adversary_file, "JSON {\"columns\": [...]} per global state");
  simulate->add_option("-n,--rollouts", opt.rollouts, "Number of rollouts");
  simulate->add_option("--horizon", opt.horizon, "Rollout length in ticks");
  simulate->add_option("--trajectories", opt.trajectories, "Rollouts written as CSV");
  simulate->add_flag("--exact-interval", opt.exact_interval, "Clopper-Pearson interval");
  auto* gamecs = app.add_subcommand("gamecs", "List the accepting end components");
  common(gamecs, true);
  gamecs->add_flag("--emit-product", opt.emit_product, "Also write the product game");
  gamecs->add_flag("--emit-global", opt.emit_global, "Also write the global game");
  auto* check = app.add_subcommand("check-spec", "Parse a specification and print its automaton");
  common(check, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*abstract) return cmd_abstract(opt);
    if (*synth) return cmd_synthesize(opt);
    if (*simulate) return cmd_simulate(opt);
    if (*gamecs) return cmd_gamecs(opt);
    if (*check) return cmd_check_spec(opt);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("SchemaError: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 4;
  }
  return 0;
}
