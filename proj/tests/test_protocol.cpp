#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "negobench/baselines.hpp"
#include "negobench/protocol.hpp"
#include "negobench/serialize.hpp"
#include "test_support.hpp"

using namespace negobench;
namespace nt = negobench::test;

namespace {

std::uint64_t binomial_sum(int f, int k) {
  std::uint64_t total = 0, c = 1;
  for (int i = 0; i <= k && i <= f; ++i) {
    total += c;
    c = c * (f - i) / (i + 1);
  }
  return total;
}

ValueApproximation lens(ValueKind kind) { return ValueApproximation{kind, {}, nullptr}; }

}  // namespace

TEST_CASE("feasible update counts match the binomial formula") {
  Rng rng(71);
  for (int i = 0; i < 50; ++i) {
    const Game game = nt::random_game(rng, 2, 4, 1, 5, 1, 5, 0.3, -10, 10);
    const GameContext ctx(game);
    const CommitmentState s = nt::random_state(ctx, rng, 0.3);
    const int proposer = 0, partner = 1;
    const int k = static_cast<int>(rng.range(1, 3));
    const auto updates = enumerate_feasible_updates(ctx, s, proposer, partner, k);
    const std::uint64_t want = binomial_sum(ctx.free_action_count(s, proposer), k) *
                                   binomial_sum(ctx.free_action_count(s, partner), k) -
                               1;
    CHECK(updates.size() == want);
    CHECK(count_joint_updates(ctx.free_action_count(s, proposer),
                              ctx.free_action_count(s, partner), k) == want);
  }
}

TEST_CASE("5 free slots each with k=2 gives 255 updates") {
  CHECK(count_joint_updates(5, 5, 2) == 255);
}

TEST_CASE("degenerate enumerations") {
  Game game;
  game.num_players = 2;
  game.actions_per_player = {0, 1};
  Goal g0;
  g0.id = 0;
  g0.kind = GoalKind::kLinear;
  g0.required = {SlotRef{1, 0}};
  game.goals = {g0};
  game.utilities.num_goals = 1;
  game.utilities.num_players = 2;
  game.utilities.values = {1, 1};
  const GameContext ctx(game);
  // proposer has 0 free slots, partner has 1, k=2: exactly one update
  CHECK(enumerate_feasible_updates(ctx, ctx.empty_state(), 0, 1, 2).size() == 1);
  // everything committed: empty stream
  const CommitmentState full =
      ctx.with_slots(ctx.empty_state(), std::vector<int>{ctx.slot_of(1, 0)}, 0);
  CHECK(enumerate_feasible_updates(ctx, full, 0, 1, 2).empty());
}

TEST_CASE("enumeration order is lexicographic, proposer side major") {
  Game game;
  game.num_players = 2;
  game.actions_per_player = {2, 2};
  Goal g0;
  g0.id = 0;
  g0.kind = GoalKind::kLinear;
  g0.required = {SlotRef{0, 0}};
  game.goals = {g0};
  game.utilities.num_goals = 1;
  game.utilities.num_players = 2;
  game.utilities.values = {1, 1};
  const GameContext ctx(game);
  const auto updates = enumerate_feasible_updates(ctx, ctx.empty_state(), 0, 1, 1);
  REQUIRE(updates.size() == 8);  // 3*3 - 1
  CHECK(updates[0] == JointUpdate{{}, {0}});
  CHECK(updates[1] == JointUpdate{{}, {1}});
  CHECK(updates[2] == JointUpdate{{0}, {}});
  CHECK(updates[3] == JointUpdate{{0}, {0}});
  CHECK(updates[7] == JointUpdate{{1}, {1}});
}

TEST_CASE("exclusion-violating updates are filtered from the feasible set") {
  Game game = nt::pill_game();
  GameContext ctx(game);
  ctx.set_exclusions({{ctx.slot_of(1, 0), ctx.slot_of(1, 1)}});
  const auto updates = enumerate_feasible_updates(ctx, ctx.empty_state(), 0, 1, 2);
  for (const JointUpdate& u : updates) {
    const bool both = std::count(u.partner_additions.begin(), u.partner_additions.end(), 0) &&
                      std::count(u.partner_additions.begin(), u.partner_additions.end(), 1);
    CHECK_FALSE(both);
  }
}

TEST_CASE("myopic best offer on the bait/poison game takes the combined deal") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  const auto offer = best_offer(ctx, ctx.empty_state(), 0, 1, lens(ValueKind::kReward), 2);
  REQUIRE(offer.has_value());
  CHECK(offer->proposer_additions == std::vector<int>{0});
  CHECK(offer->partner_additions == std::vector<int>{0, 1});
}

TEST_CASE("upper-bound best offer filters the combined deal") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  const auto offer = best_offer(ctx, ctx.empty_state(), 0, 1, lens(ValueKind::kUpper), 2);
  REQUIRE(offer.has_value());
  // No offer may raise the poison satisfaction: the victim's optimistic
  // value would drop below its current 30.
  CHECK(std::count(offer->partner_additions.begin(), offer->partner_additions.end(), 1) == 0);
}

TEST_CASE("full play on the bait/poison game reproduces both outcomes") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  ProtocolConfig config;
  config.proposer_rounds_per_player = 1;
  config.k = 2;

  const Trace myopic = play_game(ctx, lens(ValueKind::kReward), config);
  CHECK(myopic.terminal_payoffs[0] == Rational(40));
  CHECK(myopic.terminal_payoffs[1] == Rational(5));

  const Trace upper = play_game(ctx, lens(ValueKind::kUpper), config);
  CHECK(upper.terminal_payoffs[1] == Rational(30));

  const Trace exact = play_game(ctx, lens(ValueKind::kExact), config);
  CHECK(exact.terminal_payoffs[0] == Rational(30));
  CHECK(exact.terminal_payoffs[1] == Rational(30));
}

TEST_CASE("per-player lens override: cautious victim dodges the trap") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  ProtocolConfig config;
  config.proposer_rounds_per_player = 1;
  config.k = 2;
  // homogeneous myopic play walks into the poison (victim 5); giving
  // only the victim the optimistic lens blocks the combined deal
  ValueApproximation mixed{ValueKind::kReward, {}, nullptr,
                           {ValueKind::kReward, ValueKind::kUpper}};
  const Trace trace = play_game(ctx, mixed, config);
  CHECK(trace.method == "mixed:reward,upper");
  CHECK(trace.terminal_payoffs[1] == Rational(30));
  CHECK(trace.terminal_payoffs[0] == Rational(30));

  ValueApproximation bad{ValueKind::kReward, {}, nullptr, {ValueKind::kReward}};
  CHECK_THROWS_AS(play_game(ctx, bad, config), ValidationError);
  ValueApproximation bad2{ValueKind::kReward, {}, nullptr,
                          {ValueKind::kExact, ValueKind::kReward}};
  CHECK_THROWS_AS(play_game(ctx, bad2, config), ValidationError);
}

TEST_CASE("no acceptable update returns none") {
  // Any commitment strictly hurts the partner under myopic reward.
  Game game;
  game.num_players = 2;
  game.actions_per_player = {1, 1};
  Goal g0;
  g0.id = 0;
  g0.kind = GoalKind::kLinear;
  g0.required = {SlotRef{0, 0}, SlotRef{1, 0}};
  game.goals = {g0};
  game.utilities.num_goals = 1;
  game.utilities.num_players = 2;
  game.utilities.values = {5, -5};
  const GameContext ctx(game);
  CHECK_FALSE(best_offer(ctx, ctx.empty_state(), 0, 1, lens(ValueKind::kReward), 2).has_value());
}

TEST_CASE("strict-gain switch refuses value-neutral offers") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  ProtocolConfig strict;
  strict.require_strict_proposer_gain = true;
  // Upper values are constant for the proposer, so nothing clears the bar.
  CHECK_FALSE(
      best_offer(ctx, ctx.empty_state(), 0, 1, lens(ValueKind::kUpper), 2, strict).has_value());
}

TEST_CASE("T=0 yields an empty trace with zero payoffs") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  ProtocolConfig config;
  config.proposer_rounds_per_player = 0;
  const Trace t = play_game(ctx, lens(ValueKind::kReward), config);
  CHECK(t.turns.empty());
  for (const Rational& v : t.terminal_payoffs) CHECK(v == Rational(0));
}

TEST_CASE("mcts with a single other player returns it immediately") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  ProtocolConfig config;
  config.mcts_simulations = 1;
  CHECK(mcts_select_partner(ctx, ctx.empty_state(), 0, lens(ValueKind::kReward), config) == 1);
  CHECK(mcts_select_partner(ctx, ctx.empty_state(), 1, lens(ValueKind::kReward), config) == 0);
}

TEST_CASE("mcts selection is deterministic") {
  Rng rng(73);
  for (int i = 0; i < 10; ++i) {
    const Game game = nt::random_game(rng, 3, 5, 1, 2, 2, 8, 0.3, -15, 15);
    const GameContext ctx(game);
    ProtocolConfig config;
    config.mcts_simulations = 40;
    const int a = mcts_select_partner(ctx, ctx.empty_state(), 0, lens(ValueKind::kReward), config);
    const int b = mcts_select_partner(ctx, ctx.empty_state(), 0, lens(ValueKind::kReward), config);
    CHECK(a == b);
  }
}

TEST_CASE("mcts with exact leaves matches one-ply exhaustive partner choice") {
  // The equality is guaranteed where child subtrees cannot drift: with one
  // turn remaining, every child is terminal and its mean IS the exact
  // continuation, so the visit argmax must match the one-ply argmax for
  // any positive gap. (Deeper in the tree, a value-tied proposer makes
  // UCB split visits across tied branches, so child means average over
  // ties instead of following the solver's deterministic tie-break; the
  // deep-tree behavior is covered by the determinism and play_game tests.)
  Rng rng(79);
  int tested = 0;
  for (int i = 0; i < 200 && tested < 12; ++i) {
    const Game game = nt::random_game(rng, 3, 4, 1, 2, 2, 4, 0.3, -10, 10);
    const GameContext ctx(game);
    ProtocolConfig config;
    config.proposer_rounds_per_player = 1;
    config.k = 2;
    const int horizon = config.horizon(ctx.num_players());
    SolverSession session(ctx, horizon, config.k);
    ValueApproximation exact{ValueKind::kExact, {}, &session};

    // Random mid-game state at the final turn.
    const int proposer = (horizon - 1) % ctx.num_players();
    const CommitmentState root = nt::random_state(ctx, rng, 0.35, horizon - 1);

    std::vector<std::int64_t> values;
    std::vector<int> partners;
    for (int r = 0; r < ctx.num_players(); ++r) {
      if (r == proposer) continue;
      const auto offer = best_offer(ctx, root, proposer, r, exact, config.k, config);
      CommitmentState next =
          offer ? apply_update(ctx, root, proposer, r, *offer, horizon) : root;
      next.turn = horizon;
      std::vector<std::int64_t> v(ctx.num_players());
      session.exact_value_scaled(next, v.data());
      values.push_back(v[proposer]);
      partners.push_back(r);
    }
    std::vector<std::int64_t> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[sorted.size() - 1] == sorted[sorted.size() - 2]) continue;  // tie at the root
    ++tested;
    const auto best = std::max_element(values.begin(), values.end());
    const int want = partners[best - values.begin()];

    config.mcts_simulations = 200;
    CHECK(mcts_select_partner(ctx, root, proposer, exact, config) == want);
  }
  CHECK(tested >= 8);
}

TEST_CASE("delta-evaluated offer search equals a full-evaluation reference") {
  // Reference: materialize every candidate, evaluate both players with the
  // rational API on the post-state, apply the documented selection rule.
  Rng rng(81);
  for (int i = 0; i < 80; ++i) {
    const Game game = nt::random_game(rng, 2, 5, 1, 4, 1, 8, 0.4, -25, 25);
    const GameContext ctx(game);
    const CommitmentState s = nt::random_state(ctx, rng, rng.next_double() * 0.7);
    const int proposer = static_cast<int>(rng.below(game.num_players));
    int partner = static_cast<int>(rng.below(game.num_players - 1));
    if (partner >= proposer) ++partner;
    const int k = static_cast<int>(rng.range(1, 2));
    for (ValueKind kind : {ValueKind::kReward, ValueKind::kUpper, ValueKind::kLower}) {
      const ValueApproximation approx{kind, {}, nullptr};
      const PayoffVector base = evaluate(approx, ctx, s);
      std::optional<JointUpdate> want;
      Rational best_val = base[proposer];
      bool found = false;
      for (const JointUpdate& u : enumerate_feasible_updates(ctx, s, proposer, partner, k)) {
        const CommitmentState post = apply_update(ctx, s, proposer, partner, u, s.turn);
        const PayoffVector v = evaluate(approx, ctx, post);
        if (v[partner] < base[partner]) continue;
        if (v[proposer] > best_val || (!found && v[proposer] == best_val)) {
          best_val = v[proposer];
          want = u;
          found = true;
        }
      }
      const auto got = best_offer(ctx, s, proposer, partner, approx, k);
      CHECK(got == want);
    }
  }
}

TEST_CASE("protocol invariants over random playthroughs") {
  Rng rng(83);
  for (int i = 0; i < 60; ++i) {
    const Game game = nt::random_game(rng, 2, 4, 1, 3, 1, 7, 0.4, -20, 20);
    const GameContext ctx(game);
    ProtocolConfig config;
    config.proposer_rounds_per_player = static_cast<int>(rng.range(1, 2));
    config.k = 2;
    config.mcts_simulations = 16;
    const ValueKind kind = static_cast<ValueKind>(rng.range(0, 2));
    const Trace trace = play_game(ctx, lens(kind), config);

    const int horizon = config.horizon(ctx.num_players());
    REQUIRE(static_cast<int>(trace.turns.size()) == horizon);

    std::vector<int> proposals(ctx.num_players(), 0);
    CommitmentState prev = ctx.empty_state();
    for (const TurnRecord& rec : trace.turns) {
      proposals[rec.proposer]++;
      // monotone entries
      for (int s = 0; s < ctx.total_slots(); ++s)
        if (ctx.is_set(prev, s)) CHECK(ctx.is_set(rec.state_after, s));
      if (rec.accepted) {
        REQUIRE(rec.partner.has_value());
        REQUIRE(rec.offer.has_value());
        CHECK_FALSE(rec.offer->empty());
        CHECK(rec.offer->proposer_additions.size() <= static_cast<std::size_t>(config.k));
        CHECK(rec.offer->partner_additions.size() <= static_cast<std::size_t>(config.k));
        // partner weak improvement, proposer never strictly worse
        const PayoffVector before = evaluate(lens(kind), ctx, prev);
        const PayoffVector after = evaluate(lens(kind), ctx, rec.state_after);
        CHECK(after[*rec.partner] >= before[*rec.partner]);
        CHECK(after[rec.proposer] >= before[rec.proposer]);
      } else {
        // rejection leaves the entries untouched
        for (int s = 0; s < ctx.total_slots(); ++s)
          CHECK(ctx.is_set(rec.state_after, s) == ctx.is_set(prev, s));
      }
      prev = rec.state_after;
    }
    for (int n = 0; n < ctx.num_players(); ++n)
      CHECK(proposals[n] == config.proposer_rounds_per_player);
  }
}

TEST_CASE("replay is byte-identical") {
  Rng rng(89);
  for (int i = 0; i < 10; ++i) {
    const Game game = nt::random_game(rng, 2, 4, 1, 3, 2, 6, 0.3, -15, 15);
    const GameContext ctx(game);
    ProtocolConfig config;
    config.mcts_simulations = 24;
    config.seed = 1234;
    for (ValueKind kind : {ValueKind::kReward, ValueKind::kUpper, ValueKind::kLower}) {
      const Trace a = play_game(ctx, lens(kind), config);
      const Trace b = play_game(ctx, lens(kind), config);
      CHECK(trace_to_string(ctx, a) == trace_to_string(ctx, b));
    }
  }
}

TEST_CASE("rejection fixpoint: a blocked state stays fixed to the horizon") {
  // Both players are strictly hurt by every commitment.
  Game game;
  game.num_players = 2;
  game.actions_per_player = {1, 1};
  Goal a, b;
  a.id = 0;
  a.kind = GoalKind::kLinear;
  a.required = {SlotRef{0, 0}};
  b.id = 1;
  b.kind = GoalKind::kLinear;
  b.required = {SlotRef{1, 0}};
  game.goals = {a, b};
  game.utilities.num_goals = 2;
  game.utilities.num_players = 2;
  game.utilities.values = {-3, -4, -5, -6};
  const GameContext ctx(game);
  ProtocolConfig config;
  config.proposer_rounds_per_player = 3;
  const Trace t = play_game(ctx, lens(ValueKind::kReward), config);
  for (const TurnRecord& rec : t.turns) CHECK_FALSE(rec.accepted);
  for (const Rational& v : t.terminal_payoffs) CHECK(v == Rational(0));
}

TEST_CASE("trace serialization round-trips") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  ProtocolConfig config;
  const Trace t = play_game(ctx, lens(ValueKind::kReward), config);
  const nlohmann::json j = trace_to_json(ctx, t);
  const Trace back = trace_from_json(ctx, j);
  CHECK(trace_to_string(ctx, back) == trace_to_string(ctx, t));
  CHECK(trace_terminal_payoffs(j) == t.terminal_payoffs);
}
