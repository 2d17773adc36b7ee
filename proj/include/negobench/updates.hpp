#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "negobench/core.hpp"

namespace negobench {

// A proposed binding commitment delta for one proposer/partner pair.
// Additions are action indices into each side's own action list; at most
// k per side; at least one addition overall; 0->1 flips only.
struct JointUpdate {
  std::vector<int> proposer_additions;
  std::vector<int> partner_additions;

  bool empty() const { return proposer_additions.empty() && partner_additions.empty(); }
  bool operator==(const JointUpdate&) const = default;
};

// Number of candidate updates before exclusion filtering:
// (sum_{i<=k} C(free_p, i)) * (sum_{i<=k} C(free_r, i)) - 1.
std::uint64_t count_joint_updates(int free_proposer, int free_partner, int k);

// Subsets of `items` of size <= k in lexicographic sorted-tuple order,
// starting with the empty set.
std::vector<std::vector<int>> subsets_up_to(const std::vector<int>& items, int k);

CommitmentState apply_update(const GameContext& ctx, const CommitmentState& state, int proposer,
                             int partner, const JointUpdate& update, int new_turn);

// Visits every feasible update in deterministic order: proposer subsets
// major, partner subsets minor, both in lexicographic sorted-tuple order,
// skipping the empty pair and any update whose post-state completes a
// mutually-exclusive set. Visitor signature:
//   void f(const std::vector<int>& proposer_actions,
//          const std::vector<int>& partner_actions)
template <typename F>
void for_each_feasible_update(const GameContext& ctx, const CommitmentState& state, int proposer,
                              int partner, int k, F&& visit) {
  const std::vector<std::vector<int>> prop = subsets_up_to(ctx.free_actions(state, proposer), k);
  const std::vector<std::vector<int>> part = subsets_up_to(ctx.free_actions(state, partner), k);
  const bool check_exclusions = !ctx.exclusions().empty();
  std::vector<int> slots;
  for (const auto& a : prop) {
    for (const auto& b : part) {
      if (a.empty() && b.empty()) continue;
      if (check_exclusions) {
        slots.clear();
        for (int j : a) slots.push_back(ctx.slot_of(proposer, j));
        for (int j : b) slots.push_back(ctx.slot_of(partner, j));
        const CommitmentState post = ctx.with_slots(state, slots, state.turn);
        if (ctx.violates_exclusions(post)) continue;
      }
      visit(a, b);
    }
  }
}

// Materialized form for tests and the CLI.
std::vector<JointUpdate> enumerate_feasible_updates(const GameContext& ctx,
                                                    const CommitmentState& state, int proposer,
                                                    int partner, int k);

}  // namespace negobench
