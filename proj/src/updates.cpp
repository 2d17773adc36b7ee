#include "negobench/updates.hpp"

namespace negobench {

std::uint64_t count_joint_updates(int free_proposer, int free_partner, int k) {
  auto side = [k](int f) {
    unsigned __int128 total = 0;
    unsigned __int128 c = 1;  // C(f, 0)
    for (int i = 0; i <= k && i <= f; ++i) {
      total += c;
      c = c * static_cast<unsigned>(f - i) / static_cast<unsigned>(i + 1);
    }
    return total;
  };
  unsigned __int128 n = side(free_proposer) * side(free_partner);
  n -= 1;
  if (n > UINT64_MAX) return UINT64_MAX;
  return static_cast<std::uint64_t>(n);
}

std::vector<std::vector<int>> subsets_up_to(const std::vector<int>& items, int k) {
  std::vector<std::vector<int>> out;
  out.push_back({});
  std::vector<int> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    for (std::size_t i = start; i < items.size(); ++i) {
      cur.push_back(items[i]);
      out.push_back(cur);
      if (static_cast<int>(cur.size()) < k) self(self, i + 1);
      cur.pop_back();
    }
  };
  if (k > 0) rec(rec, 0);
  return out;
}

CommitmentState apply_update(const GameContext& ctx, const CommitmentState& state, int proposer,
                             int partner, const JointUpdate& update, int new_turn) {
  std::vector<int> slots;
  slots.reserve(update.proposer_additions.size() + update.partner_additions.size());
  for (int j : update.proposer_additions) slots.push_back(ctx.slot_of(proposer, j));
  for (int j : update.partner_additions) slots.push_back(ctx.slot_of(partner, j));
  return ctx.with_slots(state, slots, new_turn);
}

std::vector<JointUpdate> enumerate_feasible_updates(const GameContext& ctx,
                                                    const CommitmentState& state, int proposer,
                                                    int partner, int k) {
  if (proposer == partner)
    throw ValidationError("enumerate_feasible_updates: proposer == partner");
  std::vector<JointUpdate> out;
  for_each_feasible_update(ctx, state, proposer, partner, k,
                           [&](const std::vector<int>& a, const std::vector<int>& b) {
                             out.push_back(JointUpdate{a, b});
                           });
  return out;
}

}  // namespace negobench
