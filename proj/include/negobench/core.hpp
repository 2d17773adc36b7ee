#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "negobench/errors.hpp"
#include "negobench/rational.hpp"

namespace negobench {

using PayoffVector = std::vector<Rational>;

enum class GoalKind { kLinear, kAllOrNothing };

// One commitment slot: action j of player n.
struct SlotRef {
  int player = 0;
  int action = 0;
  auto operator<=>(const SlotRef&) const = default;
};

struct Goal {
  int id = 0;
  GoalKind kind = GoalKind::kLinear;
  std::vector<SlotRef> required;
};

// Row-major goals x players, integer entries.
struct GoalUtilityMatrix {
  int num_goals = 0;
  int num_players = 0;
  std::vector<std::int64_t> values;

  std::int64_t at(int goal, int player) const {
    return values[static_cast<std::size_t>(goal) * num_players + player];
  }
  std::int64_t& at(int goal, int player) {
    return values[static_cast<std::size_t>(goal) * num_players + player];
  }
};

struct Provenance {
  std::string kind;  // "generator" | "topfile" | "manual"
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string config_json;  // resolved generator config, replayable
  std::string topfile_id;
  std::vector<std::pair<int, int>> pill_pairs;  // (beneficiary, victim)
};

struct Game {
  int num_players = 0;
  std::vector<int> actions_per_player;
  std::vector<Goal> goals;
  GoalUtilityMatrix utilities;
  // Utilities carry this denominator (topfile threshold splits); reported
  // payoffs are utility-space values divided by it.
  std::int64_t payoff_denom = 1;
  Provenance provenance;

  int num_goals() const { return static_cast<int>(goals.size()); }
  int total_slots() const {
    int n = 0;
    for (int a : actions_per_player) n += a;
    return n;
  }
};

// Throws ValidationError on any inconsistency (bad slot refs, empty or
// undersized required sets, utility matrix shape, player/goal counts).
void validate_game(const Game& game);

// Bit-packed joint commitment matrix plus the turn counter. Words are
// padded for the vector kernels; producing a successor copies the words.
struct CommitmentState {
  std::vector<std::uint64_t> words;
  int turn = 0;

  bool operator==(const CommitmentState&) const = default;
};

// Immutable per-game derived structure: slot numbering, per-goal packed
// masks, contributor tables, and the common-denominator integer scale
// used by the fast evaluation paths.
class GameContext {
 public:
  explicit GameContext(Game game);

  const Game& game() const { return game_; }
  int num_players() const { return game_.num_players; }
  int num_goals() const { return game_.num_goals(); }
  int total_slots() const { return total_slots_; }
  int words() const { return words_; }

  int slot_of(int player, int action) const { return offsets_[player] + action; }
  SlotRef slot_ref(int slot) const { return slot_refs_[slot]; }

  CommitmentState empty_state() const;
  bool is_set(const CommitmentState& s, int slot) const {
    return (s.words[slot >> 6] >> (slot & 63)) & 1u;
  }
  bool all_set(const CommitmentState& s) const;
  // Copies, flips the given slots to 1, stamps the new turn. Slots already
  // set are a caller bug in engine code paths; monotonicity is preserved
  // either way.
  CommitmentState with_slots(const CommitmentState& s, std::span<const int> slots,
                             int new_turn) const;
  std::vector<int> free_actions(const CommitmentState& s, int player) const;
  int free_action_count(const CommitmentState& s, int player) const;

  // Committed required-slot counts for every goal, via the dispatched kernel.
  void satisfaction_counts(const CommitmentState& s, std::int32_t* out) const;
  std::int32_t goal_count(const CommitmentState& s, int goal) const;
  std::int32_t required_count(int goal) const { return required_counts_[goal]; }
  const std::vector<std::int32_t>& goals_touching(int slot) const { return slot_goals_[slot]; }

  struct Contributor {
    int player;
    std::int32_t required;  // this player's required-slot count in the goal
  };
  const std::vector<Contributor>& contributors(int goal) const { return contributors_[goal]; }
  // Committed slots of `player` within `goal`'s required set.
  std::int32_t player_goal_count(const CommitmentState& s, int goal, int player) const;

  // ---- integer-scaled exact values ----
  // All linear-goal satisfactions share denominator scale() = lcm of goal
  // sizes; a goal's scaled satisfaction is sat_scaled(g, count) in
  // [0, scale()]. scaled_ok() is false when the per-game overflow bound
  // fails; hot paths must then refuse (TractabilityError) while the
  // Rational APIs keep working.
  bool scaled_ok() const { return scaled_ok_; }
  std::int64_t scale() const { return scale_; }
  std::int64_t sat_scaled(int goal, std::int32_t count) const {
    if (goal_kind_[goal] == GoalKind::kAllOrNothing)
      return count == required_counts_[goal] ? scale_ : 0;
    return count * sat_step_[goal];
  }
  GoalKind goal_kind(int goal) const { return goal_kind_[goal]; }
  void require_scaled(const char* who) const;

  // Observed utility spread times goal count; MCTS value normalization.
  double payoff_span() const { return payoff_span_; }

  // Mutually-exclusive slot sets (from topfile sidecars). An update whose
  // post-state fully commits any set is infeasible.
  void set_exclusions(std::vector<std::vector<int>> exclusion_slots);
  const std::vector<std::vector<int>>& exclusions() const { return exclusions_; }
  bool violates_exclusions(const CommitmentState& s) const;

  const std::vector<std::uint64_t>& goal_masks() const { return goal_masks_; }

 private:
  Game game_;
  int total_slots_ = 0;
  int words_ = 0;
  std::vector<int> offsets_;
  std::vector<SlotRef> slot_refs_;
  std::vector<std::uint64_t> goal_masks_;  // goals x words
  std::vector<std::int32_t> required_counts_;
  std::vector<GoalKind> goal_kind_;
  std::vector<std::vector<std::int32_t>> slot_goals_;
  std::vector<std::vector<Contributor>> contributors_;
  // per goal x contributor: packed mask of that player's required slots
  std::vector<std::vector<std::vector<std::uint64_t>>> contributor_masks_;
  bool scaled_ok_ = false;
  std::int64_t scale_ = 1;
  std::vector<std::int64_t> sat_step_;  // scale / |required| for linear goals
  double payoff_span_ = 1.0;
  std::vector<std::vector<int>> exclusions_;
};

// Fraction of `goal`'s required commitments present in `state` (linear),
// or the 0/1 completion indicator (all-or-nothing).
Rational goal_satisfaction(const GameContext& ctx, const Goal& goal,
                           const CommitmentState& state);

std::vector<Rational> satisfaction_vector(const GameContext& ctx, const CommitmentState& state);

// Terminal payoff R = G^T S(state) in utility space, divided by the
// game's payoff denominator.
PayoffVector reward_vector(const GameContext& ctx, const CommitmentState& state);

// Scaled variant: out[n] * payoff_denom * scale == reward * (denom*scale).
void reward_scaled(const GameContext& ctx, const std::int32_t* counts, std::int64_t* out);

}  // namespace negobench
