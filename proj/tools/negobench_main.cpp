#include <sys/resource.h>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "negobench/baselines.hpp"
#include "negobench/evaluation.hpp"
#include "negobench/generator.hpp"
#include "negobench/llm.hpp"
#include "negobench/manifest.hpp"
#include "negobench/protocol.hpp"
#include "negobench/serialize.hpp"
#include "negobench/solvers.hpp"
#include "negobench/topfile.hpp"

using namespace negobench;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitTractability = 2;
constexpr int kExitExternal = 3;

long peak_rss_kb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

// Rational from "a/b" or a plain decimal like "0.000001".
Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(text));
  const std::string whole = text.substr(0, dot);
  const std::string frac = text.substr(dot + 1);
  if (frac.size() > 18) throw ValidationError("rational literal has too many decimals: " + text);
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const bool negative = !whole.empty() && whole[0] == '-';
  const std::int64_t whole_v = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
  const std::int64_t frac_v = frac.empty() ? 0 : std::stoll(frac);
  Rational r = Rational(whole_v) + Rational(negative ? -frac_v : frac_v, den);
  return r;
}

// Tracks one run: resolved config, inputs, outputs, telemetry; writes the
// manifest on scope exit.
struct RunScope {
  RunScope(std::string command, std::string manifest_path)
      : manifest_path_(std::move(manifest_path)), start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
  }
  void input(const std::string& path) { manifest_.input_hashes.push_back({path, file_hash_hex(path)}); }
  void output(const std::string& path) { manifest_.outputs.push_back(path); }
  void config(json j) { manifest_.resolved_config = std::move(j); }
  void finish() {
    manifest_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_.peak_rss_kb = peak_rss_kb();
    write_manifest(manifest_path_, manifest_);
  }

  RunManifest manifest_;
  std::string manifest_path_;
  std::chrono::steady_clock::time_point start_;
};

// Config-file precedence: values from --config fill any flag the user did
// not pass on the command line.
json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  const json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ValidationError("config file is not a JSON object: " + path);
  return j;
}

template <typename T>
void fill_from_config(const CLI::App* cmd, const json& cfg, const std::string& flag,
                      const std::string& key, T& value) {
  if (cmd->count(flag) > 0) return;
  if (cfg.contains(key)) value = cfg[key].get<T>();
}

void emit(const std::string& out_path, const std::string& text, RunScope& run) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
    run.output(out_path);
  }
}

std::string default_manifest(const std::string& primary_out, const std::string& command) {
  if (!primary_out.empty() && primary_out != "-") return primary_out + ".manifest.json";
  return "negobench-" + command + ".manifest.json";
}

GameContext load_context(const std::string& game_path, const std::string& exclusions_path,
                         RunScope& run) {
  run.input(game_path);
  GameContext ctx(load_game_file(game_path));
  if (!exclusions_path.empty()) {
    run.input(exclusions_path);
    ctx.set_exclusions(
        exclusions_from_json(ctx, json::parse(read_text_file(exclusions_path))));
  }
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"negobench: sequential multi-party negotiation games with binding commitments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  try {
    // ---- generate ----
    auto* generate = app.add_subcommand("generate", "Generate a random game instance");
    GeneratorConfig gen;
    std::string gen_alignment = "adversarial", gen_regime = "balanced";
    std::string gen_out, gen_config, gen_manifest;
    int gen_gmin = 0, gen_gmax = 0;
    generate->add_option("--players", gen.num_players, "Number of players");
    generate->add_option("--actions", gen.actions_per_player, "Actions per player");
    generate->add_option("--actions-max", gen.actions_per_player_max,
                         "Upper bound for per-player action counts (0 = uniform)");
    generate->add_option("--goals", gen.num_goals, "Number of goals");
    generate->add_option("--latent-dim", gen.latent_dim, "Latent preference factors d");
    generate->add_option("--alignment", gen_alignment, "cooperative|adversarial");
    generate->add_option("--regime", gen_regime, "balanced|positive|negative|negative-pp");
    generate->add_option("--g-min", gen_gmin, "Override the utility range lower bound");
    generate->add_option("--g-max", gen_gmax, "Override the utility range upper bound");
    generate->add_option("--aon-fraction", gen.aon_fraction, "Fraction of all-or-nothing goals");
    generate->add_option("--zipf-alpha", gen.zipf_alpha, "Zeta exponent for goal sizes");
    generate->add_option("--noise-sigma", gen.noise_sigma, "Latent noise sigma");
    generate->add_option("--coop-mean", gen.cooperative_mean, "Cooperative player-factor mean");
    generate->add_flag("--clip-pill", gen.clip_pill_to_range,
                       "Clip injected pill utilities to the regime range");
    generate->add_option("--seed", gen.seed, "Generator seed");
    generate->add_option("--out", gen_out, "Output file (default stdout)");
    generate->add_option("--config", gen_config, "JSON config file (flags win)");
    generate->add_option("--manifest-out", gen_manifest, "Run manifest path");

    // ---- play ----
    auto* play = app.add_subcommand("play", "Play one game under a value approximation");
    std::string play_game_path, play_value = "reward", play_exclusions, play_trace_out;
    std::string play_config, play_manifest, play_leaf = "approx";
    ProtocolConfig play_protocol;
    play->add_option("--game", play_game_path, "Game file")->required();
    play->add_option("--value", play_value, "reward|upper|lower|exact|no-negotiation");
    play->add_option("--rounds", play_protocol.proposer_rounds_per_player,
                     "Proposer rounds per player");
    play->add_option("--k", play_protocol.k, "Per-player per-turn commitment budget");
    play->add_option("--mcts-sims", play_protocol.mcts_simulations, "MCTS simulations per turn");
    play->add_option("--mcts-c", play_protocol.mcts_exploration, "UCB exploration constant");
    play->add_option("--leaf-eval", play_leaf, "approx|raw leaf evaluation");
    play->add_option("--seed", play_protocol.seed, "Protocol seed");
    play->add_flag("--strict-proposer-gain", play_protocol.require_strict_proposer_gain,
                   "Require strictly improving proposer value for offers");
    play->add_option("--max-states", play_protocol.solver_limits.max_states,
                     "Exact-solver node limit");
    play->add_option("--exclusions", play_exclusions, "Mutually-exclusive-set sidecar");
    play->add_option("--trace-out", play_trace_out, "Trace output file (default stdout)");
    play->add_option("--config", play_config, "JSON config file (flags win)");
    play->add_option("--manifest-out", play_manifest, "Run manifest path");

    // ---- solve-exact ----
    auto* solve = app.add_subcommand("solve-exact", "Backward-induction value of a game");
    std::string solve_game_path, solve_out, solve_manifest, solve_exclusions;
    int solve_rounds = 1, solve_k = 2;
    std::uint64_t solve_max_states = SolverLimits{}.max_states;
    solve->add_option("--game", solve_game_path, "Game file")->required();
    solve->add_option("--rounds", solve_rounds, "Proposer rounds per player");
    solve->add_option("--k", solve_k, "Per-player per-turn commitment budget");
    solve->add_option("--max-states", solve_max_states, "Node limit");
    solve->add_option("--exclusions", solve_exclusions, "Mutually-exclusive-set sidecar");
    solve->add_option("--out", solve_out, "Output file (default stdout)");
    solve->add_option("--manifest-out", solve_manifest, "Run manifest path");

    // ---- welfare ----
    auto* welfare = app.add_subcommand("welfare", "One-shot social-welfare optimum");
    std::string welfare_game_path, welfare_objective = "utilitarian", welfare_delta = "0.000001";
    std::string welfare_out, welfare_manifest, welfare_exclusions;
    welfare->add_option("--game", welfare_game_path, "Game file")->required();
    welfare->add_option("--objective", welfare_objective, "utilitarian|nash");
    welfare->add_option("--delta", welfare_delta, "Nash payoff floor (decimal or a/b)");
    welfare->add_option("--exclusions", welfare_exclusions, "Mutually-exclusive-set sidecar");
    welfare->add_option("--out", welfare_out, "Output file (default stdout)");
    welfare->add_option("--manifest-out", welfare_manifest, "Run manifest path");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "Run a regime sweep from a grid file");
    std::string sweep_grid_path, sweep_out_dir = "sweep-out", sweep_manifest;
    int sweep_jobs = 1;
    sweep->add_option("--grid", sweep_grid_path, "Grid file (JSON)")->required();
    sweep->add_option("--out-dir", sweep_out_dir, "Report directory");
    sweep->add_option("--jobs", sweep_jobs, "Parallel workers");
    sweep->add_option("--manifest-out", sweep_manifest, "Run manifest path");

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "Convert a topfile into a game");
    std::string ingest_topfile, ingest_out, ingest_exclusions_out, ingest_names_out,
        ingest_manifest;
    ingest->add_option("--topfile", ingest_topfile, "Topfile (JSON)")->required();
    ingest->add_option("--out", ingest_out, "Game output file (default stdout)");
    ingest->add_option("--exclusions-out", ingest_exclusions_out,
                       "Exclusion-constraint sidecar output");
    ingest->add_option("--names-out", ingest_names_out, "Name-table sidecar output");
    ingest->add_option("--manifest-out", ingest_manifest, "Run manifest path");

    // ---- llm-play ----
    auto* llm = app.add_subcommand("llm-play", "Play one game with the zero-shot LLM negotiator");
    std::string llm_game_path, llm_mock, llm_trace_out, llm_manifest, llm_exclusions;
    LlmClientConfig llm_config;
    ProtocolConfig llm_protocol;
    llm->add_option("--game", llm_game_path, "Game file")->required();
    llm->add_option("--endpoint", llm_config.endpoint, "Chat-completions endpoint URL");
    llm->add_option("--model", llm_config.model, "Model name");
    llm->add_option("--api-key-env", llm_config.api_key_env,
                    "Environment variable holding the bearer token");
    llm->add_option("--mock", llm_mock, "Scripted-responder file (replaces the network)");
    llm->add_option("--rounds", llm_protocol.proposer_rounds_per_player,
                    "Proposer rounds per player");
    llm->add_option("--k-llm", llm_config.k_llm, "Per-side budget for model proposals");
    llm->add_option("--max-retries", llm_config.max_retries, "Retry count");
    llm->add_option("--seed", llm_protocol.seed, "Protocol seed (fallback randomness)");
    llm->add_option("--exclusions", llm_exclusions, "Mutually-exclusive-set sidecar");
    llm->add_option("--trace-out", llm_trace_out, "Trace output file (default stdout)");
    llm->add_option("--manifest-out", llm_manifest, "Run manifest path");

    // ---- compare ----
    auto* compare = app.add_subcommand("compare", "Improvement statistics of trace A over B");
    std::string compare_a, compare_b, compare_out, compare_manifest;
    compare->add_option("trace_a", compare_a, "Trace file A")->required();
    compare->add_option("trace_b", compare_b, "Trace file B")->required();
    compare->add_option("--out", compare_out, "Output file (default stdout)");
    compare->add_option("--manifest-out", compare_manifest, "Run manifest path");

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return kExitValidation;
    }

    if (generate->parsed()) {
      const json cfg = load_config_file(gen_config);
      fill_from_config(generate, cfg, "--players", "num_players", gen.num_players);
      fill_from_config(generate, cfg, "--actions", "actions_per_player", gen.actions_per_player);
      fill_from_config(generate, cfg, "--actions-max", "actions_per_player_max",
                       gen.actions_per_player_max);
      fill_from_config(generate, cfg, "--goals", "num_goals", gen.num_goals);
      fill_from_config(generate, cfg, "--latent-dim", "latent_dim", gen.latent_dim);
      fill_from_config(generate, cfg, "--alignment", "alignment", gen_alignment);
      fill_from_config(generate, cfg, "--regime", "payoff_regime", gen_regime);
      fill_from_config(generate, cfg, "--aon-fraction", "aon_fraction", gen.aon_fraction);
      fill_from_config(generate, cfg, "--zipf-alpha", "zipf_alpha", gen.zipf_alpha);
      fill_from_config(generate, cfg, "--noise-sigma", "noise_sigma", gen.noise_sigma);
      fill_from_config(generate, cfg, "--coop-mean", "cooperative_mean", gen.cooperative_mean);
      fill_from_config(generate, cfg, "--seed", "seed", gen.seed);
      gen.alignment = alignment_from_string(gen_alignment);
      gen.payoff_regime = regime_from_string(gen_regime);
      if (generate->count("--g-min") || cfg.contains("g_min")) {
        fill_from_config(generate, cfg, "--g-min", "g_min", gen_gmin);
        gen.g_min = gen_gmin;
      }
      if (generate->count("--g-max") || cfg.contains("g_max")) {
        fill_from_config(generate, cfg, "--g-max", "g_max", gen_gmax);
        gen.g_max = gen_gmax;
      }
      RunScope run("generate", gen_manifest.empty() ? default_manifest(gen_out, "generate")
                                                    : gen_manifest);
      run.config(json::parse(gen.canonical_json()));
      const Game game = generate_game(gen);
      emit(gen_out, game_to_string(game), run);
      run.finish();
      return kExitOk;
    }

    if (play->parsed()) {
      const json cfg = load_config_file(play_config);
      fill_from_config(play, cfg, "--value", "value", play_value);
      fill_from_config(play, cfg, "--rounds", "rounds", play_protocol.proposer_rounds_per_player);
      fill_from_config(play, cfg, "--k", "k", play_protocol.k);
      fill_from_config(play, cfg, "--mcts-sims", "mcts_sims", play_protocol.mcts_simulations);
      fill_from_config(play, cfg, "--mcts-c", "mcts_c", play_protocol.mcts_exploration);
      fill_from_config(play, cfg, "--leaf-eval", "leaf_eval", play_leaf);
      fill_from_config(play, cfg, "--seed", "seed", play_protocol.seed);
      play_protocol.leaf_eval = play_leaf == "raw" ? LeafEval::kRawPayoff : LeafEval::kApproxValue;

      RunScope run("play", play_manifest.empty() ? default_manifest(play_trace_out, "play")
                                                 : play_manifest);
      GameContext ctx = load_context(play_game_path, play_exclusions, run);
      json resolved = protocol_config_to_json(play_protocol);
      resolved["value"] = play_value;
      resolved["game"] = play_game_path;
      run.config(resolved);

      Trace trace;
      if (play_value == "no-negotiation") {
        trace = no_negotiation_trace(ctx);
        trace.config = play_protocol;
      } else {
        const ValueKind kind = value_kind_from_string(play_value);
        trace = play_game(ctx, ValueApproximation{kind, {}, nullptr}, play_protocol);
      }
      emit(play_trace_out, trace_to_string(ctx, trace), run);
      run.finish();
      return kExitOk;
    }

    if (solve->parsed()) {
      RunScope run("solve-exact",
                   solve_manifest.empty() ? default_manifest(solve_out, "solve-exact")
                                          : solve_manifest);
      GameContext ctx = load_context(solve_game_path, solve_exclusions, run);
      SolverLimits limits;
      limits.max_states = solve_max_states;
      run.config(json{{"game", solve_game_path},
                      {"rounds", solve_rounds},
                      {"k", solve_k},
                      {"max_states", solve_max_states}});
      const PayoffVector v =
          optimal_payoffs(ctx, solve_rounds * ctx.num_players(), solve_k, limits);
      json out;
      out["payoffs"] = payoffs_to_json(v);
      json floats = json::array();
      for (const Rational& r : v) floats.push_back(r.to_double());
      out["payoffs_float"] = floats;
      emit(solve_out, out.dump(2) + "\n", run);
      run.finish();
      return kExitOk;
    }

    if (welfare->parsed()) {
      RunScope run("welfare", welfare_manifest.empty() ? default_manifest(welfare_out, "welfare")
                                                       : welfare_manifest);
      GameContext ctx = load_context(welfare_game_path, welfare_exclusions, run);
      const WelfareObjective objective = welfare_objective == "nash"
                                             ? WelfareObjective::kNash
                                             : WelfareObjective::kUtilitarian;
      if (welfare_objective != "nash" && welfare_objective != "utilitarian")
        throw ValidationError("welfare: unknown objective '" + welfare_objective + "'");
      const Rational delta = parse_rational(welfare_delta);
      run.config(json{{"game", welfare_game_path},
                      {"objective", welfare_objective},
                      {"delta", welfare_delta}});
      const WelfareSolution sol = solve_welfare(ctx, objective, delta);
      json out;
      out["objective"] = welfare_objective;
      out["certificate"] = sol.certificate == WelfareCertificate::kProvedOptimal
                               ? "proved_optimal"
                               : "infeasible";
      if (sol.certificate == WelfareCertificate::kProvedOptimal) {
        json assignment = json::array();
        for (int s = 0; s < ctx.total_slots(); ++s)
          if (sol.assignment[s]) {
            const SlotRef r = ctx.slot_ref(s);
            assignment.push_back(json::array({r.player, r.action}));
          }
        out["assignment"] = assignment;
        out["payoffs"] = payoffs_to_json(sol.payoffs);
        out["utilitarian_sum"] = sol.utilitarian_sum.to_string();
        if (objective == WelfareObjective::kNash) out["nash_log_sum"] = sol.nash_log_sum;
        json sat = json::array();
        for (const Rational& s : sol.satisfaction) sat.push_back(s.to_string());
        out["satisfaction"] = sat;
      }
      emit(welfare_out, out.dump(2) + "\n", run);
      run.finish();
      return kExitOk;
    }

    if (sweep->parsed()) {
      RunScope run("sweep", sweep_manifest.empty()
                                ? sweep_out_dir + "/sweep.manifest.json"
                                : sweep_manifest);
      run.input(sweep_grid_path);
      const SweepGrid grid = grid_from_json(json::parse(read_text_file(sweep_grid_path)));
      run.config(grid_to_json(grid));
      const SweepTable table = run_sweep(grid, sweep_jobs, [](const std::string& line) {
        std::cerr << line << "\n";
      });
      std::filesystem::create_directories(sweep_out_dir);
      emit_report(table, sweep_out_dir);
      run.output(sweep_out_dir + "/raw.csv");
      run.output(sweep_out_dir + "/summary.csv");
      run.output(sweep_out_dir + "/summary.json");
      run.finish();
      return kExitOk;
    }

    if (ingest->parsed()) {
      RunScope run("ingest", ingest_manifest.empty() ? default_manifest(ingest_out, "ingest")
                                                     : ingest_manifest);
      run.input(ingest_topfile);
      const Topfile tf = parse_topfile_file(ingest_topfile);
      const TopfileConversion conv = topfile_to_game(tf);
      for (const std::string& w : conv.warnings) std::cerr << "warning: " << w << "\n";
      run.config(json{{"topfile", ingest_topfile}});
      emit(ingest_out, game_to_string(conv.game), run);
      const GameContext ctx(conv.game);
      if (!ingest_exclusions_out.empty()) {
        write_text_file(ingest_exclusions_out,
                        exclusions_to_json(ctx, conv.exclusion_slots).dump(2) + "\n");
        run.output(ingest_exclusions_out);
      }
      if (!ingest_names_out.empty()) {
        write_text_file(ingest_names_out, conv.name_table.dump(2) + "\n");
        run.output(ingest_names_out);
      }
      run.finish();
      return kExitOk;
    }

    if (llm->parsed()) {
      RunScope run("llm-play", llm_manifest.empty() ? default_manifest(llm_trace_out, "llm-play")
                                                    : llm_manifest);
      GameContext ctx = load_context(llm_game_path, llm_exclusions, run);
      run.config(json{{"game", llm_game_path},
                      {"model", llm_config.model},
                      {"endpoint", llm_mock.empty() ? llm_config.endpoint : "mock:" + llm_mock},
                      {"k_llm", llm_config.k_llm},
                      {"rounds", llm_protocol.proposer_rounds_per_player},
                      {"seed", llm_protocol.seed}});
      std::unique_ptr<Transport> transport;
      if (!llm_mock.empty()) {
        run.input(llm_mock);
        transport = std::make_unique<ScriptedTransport>(ScriptedTransport::from_file(llm_mock));
      } else {
        transport = std::make_unique<HttpTransport>(llm_config);
      }
      LlmNegotiator negotiator(ctx, llm_config, *transport);
      const Trace trace = negotiator.play_game(llm_protocol);
      emit(llm_trace_out, trace_to_string(ctx, trace), run);
      run.finish();
      return kExitOk;
    }

    if (compare->parsed()) {
      RunScope run("compare", compare_manifest.empty() ? default_manifest(compare_out, "compare")
                                                       : compare_manifest);
      run.input(compare_a);
      run.input(compare_b);
      run.config(json{{"trace_a", compare_a}, {"trace_b", compare_b}});
      const PayoffVector a = trace_terminal_payoffs(json::parse(read_text_file(compare_a)));
      const PayoffVector b = trace_terminal_payoffs(json::parse(read_text_file(compare_b)));
      const ImprovementStats stats = improvement_stats(a, b);
      json out;
      out["sum"] = stats.sum.to_string();
      out["min"] = stats.min.to_string();
      out["variance"] = stats.variance.to_string();
      out["fraction_improved"] = stats.fraction_improved.to_string();
      out["sum_float"] = stats.sum.to_double();
      out["min_float"] = stats.min.to_double();
      out["variance_float"] = stats.variance.to_double();
      out["fraction_improved_float"] = stats.fraction_improved.to_double();
      emit(compare_out, out.dump(2) + "\n", run);
      run.finish();
      return kExitOk;
    }

    std::cerr << app.help() << "\n";
    return kExitValidation;
  } catch (const TractabilityError& e) {
    std::cerr << "error (tractability): " << e.what() << "\n";
    return kExitTractability;
  } catch (const ExternalServiceError& e) {
    std::cerr << "error (external service): " << e.what() << "\n";
    return kExitExternal;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
