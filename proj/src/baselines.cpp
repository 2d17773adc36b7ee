#include "negobench/baselines.hpp"

namespace negobench {

namespace {

// Lexicographic comparison of sorted action tuples.
bool tuple_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

NoNegotiationResult no_negotiation(const GameContext& ctx) {
  const int np = ctx.num_players();
  NoNegotiationResult result;
  result.choices.resize(np);

  std::vector<int> all_chosen_slots;
  for (int n = 0; n < np; ++n) {
    const int actions = ctx.game().actions_per_player[n];
    if (actions > 25)
      throw TractabilityError("no_negotiation: player " + std::to_string(n) + " has " +
                              std::to_string(actions) + " actions (limit 25)");
    std::vector<int> best_choice;
    bool have_best = false;
    std::int64_t best_value = 0;
    Rational best_value_rational(0);
    const bool scaled = ctx.scaled_ok();

    std::vector<int> slots;
    std::vector<int> choice;
    for (std::uint32_t mask = 0; mask < (1u << actions); ++mask) {
      choice.clear();
      slots.clear();
      for (int j = 0; j < actions; ++j)
        if (mask & (1u << j)) {
          choice.push_back(j);
          slots.push_back(ctx.slot_of(n, j));
        }
      CommitmentState own = ctx.with_slots(ctx.empty_state(), slots, 0);
      if (ctx.violates_exclusions(own)) continue;

      bool better, equal;
      if (scaled) {
        const std::int64_t v = evaluate_scaled_for(ctx, ValueKind::kReward, {}, own, n);
        better = !have_best || v > best_value;
        equal = have_best && v == best_value;
        if (better) best_value = v;
      } else {
        const Rational v = reward_vector(ctx, own)[n];
        better = !have_best || v > best_value_rational;
        equal = have_best && v == best_value_rational;
        if (better) best_value_rational = v;
      }
      if (!better && equal) {
        better = choice.size() < best_choice.size() ||
                 (choice.size() == best_choice.size() && tuple_less(choice, best_choice));
      }
      if (better) {
        best_choice = choice;
        have_best = true;
      }
    }
    result.choices[n] = best_choice;
    for (int j : best_choice) all_chosen_slots.push_back(ctx.slot_of(n, j));
  }

  result.final_state = ctx.with_slots(ctx.empty_state(), all_chosen_slots, 0);
  result.payoffs = reward_vector(ctx, result.final_state);
  return result;
}

Trace no_negotiation_trace(const GameContext& ctx) {
  const NoNegotiationResult r = no_negotiation(ctx);
  Trace trace;
  trace.game_provenance = ctx.game().provenance;
  trace.method = "no-negotiation";
  trace.terminal_payoffs = r.payoffs;
  return trace;
}

}  // namespace negobench
