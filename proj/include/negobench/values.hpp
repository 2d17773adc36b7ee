#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "negobench/core.hpp"

namespace negobench {

class SolverSession;

enum class ValueKind { kReward, kUpper, kLower, kExact };

std::string to_string(ValueKind k);
ValueKind value_kind_from_string(const std::string& s);

struct ValueOptions {
  // The credible-threat quantifier is vacuous for a goal whose only
  // pending contributor is the victim; the literal definition keeps such
  // goals. This switch drops them instead.
  bool exclude_self_only_threats = false;
};

struct ValueApproximation {
  ValueKind kind = ValueKind::kReward;
  ValueOptions options;
  SolverSession* exact = nullptr;  // required when kind == kExact
  // Per-player override of `kind` (empty = all players share `kind`,
  // which is the evaluation default). kExact cannot be overridden.
  std::vector<ValueKind> per_player_kinds;

  ValueKind kind_for(int player) const {
    return per_player_kinds.empty() ? kind : per_player_kinds[player];
  }
  bool heterogeneous() const { return !per_player_kinds.empty(); }
};

void validate_approximation(const ValueApproximation& approx, int num_players);

// V^reward: identical to reward_vector.
PayoffVector value_reward(const GameContext& ctx, const CommitmentState& state);

// V^upper_n = sum_{g: G>0} G + sum_{g: G<0} S_g * G (all remaining
// positive-goal value assumed secured).
Rational value_upper(const GameContext& ctx, const CommitmentState& state, int player);

// Goals negative for `player` that every *other* pending contributor
// values non-negatively. Goals with no pending contributor are omitted
// (their satisfaction is 1, so membership carries no value).
std::vector<int> credible_threats(const GameContext& ctx, const CommitmentState& state,
                                  int player, const ValueOptions& opts = {});

// V^lower_n = R_n + sum_{g in CT(n)} (1 - S_g) * G_{g,n}.
Rational value_lower(const GameContext& ctx, const CommitmentState& state, int player,
                     const ValueOptions& opts = {});

// Per-player vector under the chosen approximation. Exact delegates to
// the solver session (tractability-guarded).
PayoffVector evaluate(const ValueApproximation& approx, const GameContext& ctx,
                      const CommitmentState& state);

// ---- integer-scaled fast path ----
// Values are reward-space * payoff_denom * scale; comparisons of scaled
// values are exactly comparisons of the rationals above.

struct GoalPending {
  std::int32_t pending_count = 0;    // contributors with uncommitted required slots
  int pending_single = -1;           // the one pending contributor, if count == 1
  std::int32_t neg_pending_count = 0;  // pending contributors with G_{g,m} < 0
  int neg_pending_single = -1;
};

GoalPending goal_pending(const GameContext& ctx, const CommitmentState& state, int goal);

inline bool credible_for(const GoalPending& p, std::int64_t utility, int player,
                         const ValueOptions& opts) {
  if (utility >= 0) return false;
  if (p.pending_count == 0) return false;
  if (p.neg_pending_count > 1) return false;
  if (p.neg_pending_count == 1 && p.neg_pending_single != player) return false;
  if (opts.exclude_self_only_threats && p.pending_count == 1 && p.pending_single == player)
    return false;
  return true;
}

// Fills out[0..np) with scaled values for every player under `kind`
// (kReward/kUpper/kLower). Requires ctx.scaled_ok().
void evaluate_scaled(const GameContext& ctx, ValueKind kind, const ValueOptions& opts,
                     const CommitmentState& state, std::int64_t* out);

// Single-player scaled value.
std::int64_t evaluate_scaled_for(const GameContext& ctx, ValueKind kind,
                                 const ValueOptions& opts, const CommitmentState& state,
                                 int player);

}  // namespace negobench
