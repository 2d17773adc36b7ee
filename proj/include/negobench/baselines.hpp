#pragma once

#include "negobench/core.hpp"
#include "negobench/protocol.hpp"

namespace negobench {

struct NoNegotiationResult {
  CommitmentState final_state;
  PayoffVector payoffs;
  std::vector<std::vector<int>> choices;  // per player, chosen own actions
};

// Each player independently picks the own-action subset maximizing their
// reward with everyone else at zero; the chosen subsets compose into the
// final state. Ties go to fewest commitments, then the lexicographically
// smallest action tuple. Players with more than 25 actions are refused.
NoNegotiationResult no_negotiation(const GameContext& ctx);

// Trace-shaped wrapper (no turns) so baseline outcomes flow through the
// same comparison tooling as protocol runs.
Trace no_negotiation_trace(const GameContext& ctx);

}  // namespace negobench
