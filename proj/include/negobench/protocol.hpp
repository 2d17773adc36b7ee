#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "negobench/core.hpp"
#include "negobench/solvers.hpp"
#include "negobench/updates.hpp"
#include "negobench/values.hpp"

namespace negobench {

enum class LeafEval { kApproxValue, kRawPayoff };

struct ProtocolConfig {
  int proposer_rounds_per_player = 1;
  int k = 2;  // per-player per-turn commitment budget
  int mcts_simulations = 200;
  double mcts_exploration = 1.414;
  LeafEval leaf_eval = LeafEval::kApproxValue;
  std::uint64_t seed = 0;
  // Demand a strictly improving proposer value for any offer. Off by
  // default -- value-neutral offers are what lets an upper-lens pair
  // still complete mutually beneficial goals.
  bool require_strict_proposer_gain = false;
  std::uint64_t max_offer_candidates = 1'000'000;
  SolverLimits solver_limits{};

  int horizon(int num_players) const { return proposer_rounds_per_player * num_players; }
};

void validate_protocol_config(const ProtocolConfig& config);

struct TurnRecord {
  int turn = 0;
  int proposer = 0;
  std::optional<int> partner;
  std::optional<JointUpdate> offer;
  bool accepted = false;
  CommitmentState state_after;
  std::string llm_reply;  // raw model output, llm games only
};

struct Trace {
  Provenance game_provenance;
  std::string method;  // value-approximation name or baseline id
  ProtocolConfig config;
  std::vector<TurnRecord> turns;
  PayoffVector terminal_payoffs;
  std::string prompt_version_hash;  // llm games only
};

// Ultimatum offer construction: among candidates the partner weakly
// accepts (post-value >= current value under the approximation), the
// proposer's argmax, first maximizer on ties; none when the acceptable
// set is empty or the best acceptable offer would strictly hurt the
// proposer. With kExact both baselines are the rejection-continuation
// values and the proposer must strictly beat them.
std::optional<JointUpdate> best_offer(const GameContext& ctx, const CommitmentState& state,
                                      int proposer, int partner,
                                      const ValueApproximation& approx, int k,
                                      const ProtocolConfig& config = {});

// MCTS over partner choice; deterministic for a fixed configuration
// (ties resolve to the lowest partner index).
int mcts_select_partner(const GameContext& ctx, const CommitmentState& state, int proposer,
                        const ValueApproximation& approx, const ProtocolConfig& config);

// Full game loop: round-robin proposers, MCTS partner choice, ultimatum
// offers, engine-enforced acceptance. kExact plays the backward-induction
// decision directly, so the trace is the optimal path.
Trace play_game(const GameContext& ctx, const ValueApproximation& approx,
                const ProtocolConfig& config);

}  // namespace negobench
