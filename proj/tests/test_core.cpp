#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "negobench/core.hpp"
#include "negobench/serialize.hpp"
#include "test_support.hpp"

using namespace negobench;
namespace nt = negobench::test;

TEST_CASE("goal satisfaction on the bait/poison game") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  const CommitmentState empty = ctx.empty_state();

  // all-zero state
  CHECK(goal_satisfaction(ctx, game.goals[0], empty) == Rational(0));
  CHECK(goal_satisfaction(ctx, game.goals[1], empty) == Rational(0));

  // one of two bait halves: all-or-nothing stays at 0
  const int bait0 = ctx.slot_of(0, 0);
  const CommitmentState half = ctx.with_slots(empty, std::vector<int>{bait0}, 1);
  CHECK(goal_satisfaction(ctx, game.goals[0], half) == Rational(0));

  // linear goal at half completion
  Goal linear;
  linear.id = 9;
  linear.kind = GoalKind::kLinear;
  linear.required = {SlotRef{0, 0}, SlotRef{1, 0}};
  CHECK(goal_satisfaction(ctx, linear, half) == Rational(1, 2));
}

TEST_CASE("reward on the completed bait+poison state") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  CommitmentState s = ctx.empty_state();
  s = ctx.with_slots(s, std::vector<int>{ctx.slot_of(0, 0), ctx.slot_of(1, 0), ctx.slot_of(1, 1)},
                     1);
  const PayoffVector r = reward_vector(ctx, s);
  CHECK(r[0] == Rational(40));  // 30 bait + 10 poison
  CHECK(r[1] == Rational(5));   // 30 - 25
}

TEST_CASE("zero state gives zero rewards; full state gives all-ones satisfaction") {
  Rng rng(11);
  for (int i = 0; i < 30; ++i) {
    const Game game = nt::random_game(rng, 2, 4, 1, 3, 1, 6, 0.3, -20, 20);
    const GameContext ctx(game);
    for (const Rational& v : reward_vector(ctx, ctx.empty_state()))
      CHECK(v == Rational(0));
    std::vector<int> all;
    for (int s = 0; s < ctx.total_slots(); ++s) all.push_back(s);
    const CommitmentState full = ctx.with_slots(ctx.empty_state(), all, 0);
    for (const Rational& v : satisfaction_vector(ctx, full)) CHECK(v == Rational(1));
  }
}

TEST_CASE("satisfaction and reward match the naive oracle on random games") {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const Game game = nt::random_game(rng, 2, 5, 1, 4, 1, 8, 0.4, -30, 30);
    const GameContext ctx(game);
    const CommitmentState s = nt::random_state(ctx, rng, rng.next_double());
    const auto committed = nt::bool_matrix(game, ctx, s);

    const std::vector<Rational> sat = satisfaction_vector(ctx, s);
    for (int g = 0; g < game.num_goals(); ++g)
      CHECK(sat[g] == nt::naive_goal_satisfaction(game, game.goals[g], committed));

    const PayoffVector r = reward_vector(ctx, s);
    const PayoffVector want = nt::naive_reward(game, ctx, s);
    for (int n = 0; n < game.num_players; ++n) CHECK(r[n] == want[n]);
  }
}

TEST_CASE("scaled reward equals rational reward") {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const Game game = nt::random_game(rng, 2, 5, 1, 3, 1, 8, 0.4, -30, 30);
    const GameContext ctx(game);
    REQUIRE(ctx.scaled_ok());
    const CommitmentState s = nt::random_state(ctx, rng, 0.5);
    std::vector<std::int32_t> counts(ctx.num_goals());
    ctx.satisfaction_counts(s, counts.data());
    std::vector<std::int64_t> scaled(ctx.num_players());
    reward_scaled(ctx, counts.data(), scaled.data());
    const PayoffVector r = reward_vector(ctx, s);
    for (int n = 0; n < ctx.num_players(); ++n)
      CHECK(Rational(scaled[n], ctx.scale() * game.payoff_denom) == r[n]);
  }
}

TEST_CASE("monotone dominance for non-negative columns") {
  Rng rng(29);
  for (int i = 0; i < 50; ++i) {
    Game game = nt::random_game(rng, 2, 4, 1, 3, 2, 6, 0.3, 0, 25);  // all non-negative
    const GameContext ctx(game);
    CommitmentState s = ctx.empty_state();
    PayoffVector prev = reward_vector(ctx, s);
    for (int slot = 0; slot < ctx.total_slots(); ++slot) {
      s = ctx.with_slots(s, std::vector<int>{slot}, 0);
      const PayoffVector cur = reward_vector(ctx, s);
      for (int n = 0; n < ctx.num_players(); ++n) CHECK(cur[n] >= prev[n]);
      prev = cur;
    }
  }
}

TEST_CASE("linearity: reward is additive over disjoint flips for linear-only games") {
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const Game game = nt::random_game(rng, 2, 4, 1, 3, 1, 6, 0.0, -20, 20);
    const GameContext ctx(game);
    std::vector<int> a, b;
    for (int s = 0; s < ctx.total_slots(); ++s) (rng.next_double() < 0.5 ? a : b).push_back(s);
    const CommitmentState sa = ctx.with_slots(ctx.empty_state(), a, 0);
    const CommitmentState sb = ctx.with_slots(ctx.empty_state(), b, 0);
    CommitmentState sab = ctx.with_slots(sa, b, 0);
    const PayoffVector ra = reward_vector(ctx, sa);
    const PayoffVector rb = reward_vector(ctx, sb);
    const PayoffVector rab = reward_vector(ctx, sab);
    for (int n = 0; n < ctx.num_players(); ++n) CHECK(rab[n] == ra[n] + rb[n]);
  }
}

TEST_CASE("all-or-nothing gate: only the last missing flip pays out") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  CommitmentState s = ctx.empty_state();
  s = ctx.with_slots(s, std::vector<int>{ctx.slot_of(1, 0)}, 0);
  CHECK(goal_satisfaction(ctx, game.goals[0], s) == Rational(0));
  s = ctx.with_slots(s, std::vector<int>{ctx.slot_of(0, 0)}, 0);
  CHECK(goal_satisfaction(ctx, game.goals[0], s) == Rational(1));
}

TEST_CASE("validation rejects inconsistent games") {
  Game g = nt::pill_game();
  g.goals[0].required.push_back(SlotRef{5, 0});  // player out of range
  CHECK_THROWS_AS(validate_game(g), ValidationError);

  Game g2 = nt::pill_game();
  g2.goals[1].kind = GoalKind::kAllOrNothing;  // size-1 all-or-nothing
  CHECK_THROWS_AS(validate_game(g2), ValidationError);

  Game g3 = nt::pill_game();
  g3.utilities.values.pop_back();
  CHECK_THROWS_AS(validate_game(g3), ValidationError);

  Game g4 = nt::pill_game();
  g4.goals[0].required = {SlotRef{0, 0}, SlotRef{0, 0}};
  CHECK_THROWS_AS(validate_game(g4), ValidationError);
}

TEST_CASE("dimension mismatch raises a structural error") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  CommitmentState bad = ctx.empty_state();
  bad.words.push_back(0);
  CHECK_THROWS_AS(satisfaction_vector(ctx, bad), ValidationError);
}

TEST_CASE("game serialization round-trips byte-stably") {
  Rng rng(37);
  for (int i = 0; i < 20; ++i) {
    const Game game = nt::random_game(rng, 2, 5, 1, 3, 1, 7, 0.3, -30, 30);
    const std::string once = game_to_string(game);
    const Game back = game_from_string(once);
    const std::string twice = game_to_string(back);
    CHECK(once == twice);
  }
}

TEST_CASE("exclusion bookkeeping") {
  const Game game = nt::pill_game();
  GameContext ctx(game);
  ctx.set_exclusions({{ctx.slot_of(1, 0), ctx.slot_of(1, 1)}});
  CommitmentState s = ctx.empty_state();
  CHECK_FALSE(ctx.violates_exclusions(s));
  s = ctx.with_slots(s, std::vector<int>{ctx.slot_of(1, 0)}, 0);
  CHECK_FALSE(ctx.violates_exclusions(s));
  s = ctx.with_slots(s, std::vector<int>{ctx.slot_of(1, 1)}, 0);
  CHECK(ctx.violates_exclusions(s));
}
