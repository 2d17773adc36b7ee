#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "negobench/baselines.hpp"
#include "negobench/llm.hpp"
#include "test_support.hpp"

using namespace negobench;
namespace nt = negobench::test;

using nt::naive_unilateral_choice;

TEST_CASE("a player whose action completes an own-positive goal commits it") {
  Game game;
  game.num_players = 2;
  game.actions_per_player = {1, 1};
  Goal g0;
  g0.id = 0;
  g0.kind = GoalKind::kLinear;
  g0.required = {SlotRef{0, 0}};
  game.goals = {g0};
  game.utilities.num_goals = 1;
  game.utilities.num_players = 2;
  game.utilities.values = {10, 0};
  const GameContext ctx(game);
  const NoNegotiationResult r = no_negotiation(ctx);
  CHECK(r.choices[0] == std::vector<int>{0});
  CHECK(r.choices[1].empty());
  CHECK(r.payoffs[0] == Rational(10));
}

TEST_CASE("the bait/poison victim commits nothing unilaterally") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  const NoNegotiationResult r = no_negotiation(ctx);
  // bait alone stays at 0 for an all-or-nothing goal, poison is a pure
  // loss; ties resolve to the empty set
  CHECK(r.choices[0].empty());
  CHECK(r.choices[1].empty());
  CHECK(r.payoffs[0] == Rational(0));
  CHECK(r.payoffs[1] == Rational(0));
}

TEST_CASE("unilateral choices match the subset brute force") {
  Rng rng(131);
  for (int i = 0; i < 150; ++i) {
    const Game game = nt::random_game(rng, 2, 5, 1, 4, 1, 8, 0.4, -25, 25);
    const GameContext ctx(game);
    const NoNegotiationResult r = no_negotiation(ctx);
    for (int n = 0; n < game.num_players; ++n)
      CHECK(r.choices[n] == naive_unilateral_choice(game, ctx, n));
    // composed payoff reflects cross effects of the composition
    CHECK(r.payoffs == nt::naive_reward(game, ctx, r.final_state));
  }
}

TEST_CASE("no_negotiation is permutation-equivariant") {
  Rng rng(137);
  for (int i = 0; i < 25; ++i) {
    const Game game = nt::random_game(rng, 2, 4, 1, 3, 1, 6, 0.4, -20, 20);
    const int np = game.num_players;
    // swap players 0 and 1
    Game swapped = game;
    std::swap(swapped.actions_per_player[0], swapped.actions_per_player[1]);
    for (Goal& g : swapped.goals)
      for (SlotRef& r : g.required)
        if (r.player == 0)
          r.player = 1;
        else if (r.player == 1)
          r.player = 0;
    for (int gi = 0; gi < game.num_goals(); ++gi) {
      swapped.utilities.at(gi, 0) = game.utilities.at(gi, 1);
      swapped.utilities.at(gi, 1) = game.utilities.at(gi, 0);
    }
    const NoNegotiationResult a = no_negotiation(GameContext(game));
    const NoNegotiationResult b = no_negotiation(GameContext(swapped));
    CHECK(a.choices[0] == b.choices[1]);
    CHECK(a.choices[1] == b.choices[0]);
    CHECK(a.payoffs[0] == b.payoffs[1]);
    CHECK(a.payoffs[1] == b.payoffs[0]);
    for (int n = 2; n < np; ++n) {
      CHECK(a.choices[n] == b.choices[n]);
      CHECK(a.payoffs[n] == b.payoffs[n]);
    }
  }
}

TEST_CASE("action-count guard") {
  Game game;
  game.num_players = 2;
  game.actions_per_player = {26, 1};
  Goal g0;
  g0.id = 0;
  g0.kind = GoalKind::kLinear;
  g0.required = {SlotRef{1, 0}};
  game.goals = {g0};
  game.utilities.num_goals = 1;
  game.utilities.num_players = 2;
  game.utilities.values = {1, 1};
  const GameContext ctx(game);
  CHECK_THROWS_AS(no_negotiation(ctx), TractabilityError);
}

// ---------------------------------------------------------------------------
// LLM client against scripted transports
// ---------------------------------------------------------------------------

namespace {

nlohmann::json wrap_content(nlohmann::json content) {
  return nlohmann::json{{"content", std::move(content)}};
}

std::string one_shot_script(nlohmann::json content) {
  return nlohmann::json::array({wrap_content(std::move(content))}).dump();
}

}  // namespace

TEST_CASE("a valid bait-only proposal passes through unchanged") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  LlmClientConfig config;
  config.k_llm = 3;
  ScriptedTransport transport = ScriptedTransport::from_json(one_shot_script(
      nlohmann::json{{"partner", 1},
                     {"proposer_additions", nlohmann::json::array({1})},
                     {"partner_additions", nlohmann::json::array({1, 0})}}));
  LlmNegotiator negotiator(ctx, config, transport, [](double) {});
  Rng rng(1);
  const LlmTurn turn = negotiator.play_turn(ctx.empty_state(), 0, rng);
  CHECK_FALSE(turn.degraded);
  CHECK(turn.partner == 1);
  CHECK(turn.update.proposer_additions == std::vector<int>{0});
  CHECK(turn.update.partner_additions == std::vector<int>{0});
  CHECK(turn.attempts == 1);
}

TEST_CASE("out-of-range partner is replaced, valid actions preserved") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  LlmClientConfig config;
  ScriptedTransport transport = ScriptedTransport::from_json(one_shot_script(
      nlohmann::json{{"partner", 2},  // == num_players, invalid
                     {"proposer_additions", nlohmann::json::array({1})},
                     {"partner_additions", nlohmann::json::array({0, 0})}}));
  LlmNegotiator negotiator(ctx, config, transport, [](double) {});
  Rng rng(7);
  const LlmTurn turn = negotiator.play_turn(ctx.empty_state(), 0, rng);
  CHECK(turn.partner == 1);  // the only legal partner
  CHECK(turn.update.proposer_additions == std::vector<int>{0});
  CHECK(turn.update.partner_additions.empty());
}

TEST_CASE("budget violations zero the offending side only") {
  Game game = nt::pill_game();
  game.actions_per_player = {1, 4};
  Goal& poison = game.goals[1];
  poison.required = {SlotRef{1, 1}};
  const GameContext ctx(game);
  LlmClientConfig config;
  config.k_llm = 3;
  ScriptedTransport transport = ScriptedTransport::from_json(one_shot_script(
      nlohmann::json{{"partner", 1},
                     {"proposer_additions", nlohmann::json::array({1})},
                     {"partner_additions", nlohmann::json::array({1, 1, 1, 1})}}));
  LlmNegotiator negotiator(ctx, config, transport, [](double) {});
  Rng rng(9);
  const LlmTurn turn = negotiator.play_turn(ctx.empty_state(), 0, rng);
  CHECK(turn.partner == 1);
  CHECK(turn.update.proposer_additions == std::vector<int>{0});  // preserved
  CHECK(turn.update.partner_additions.empty());                  // 4 > k_llm, zeroed
}

TEST_CASE("misaligned vector lengths and 1->1 flips are zeroed") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  LlmClientConfig config;

  SUBCASE("wrong length") {
    ScriptedTransport transport = ScriptedTransport::from_json(one_shot_script(
        nlohmann::json{{"partner", 1},
                       {"proposer_additions", nlohmann::json::array({1, 0, 0})},
                       {"partner_additions", nlohmann::json::array({1, 0})}}));
    LlmNegotiator negotiator(ctx, config, transport, [](double) {});
    Rng rng(2);
    const LlmTurn turn = negotiator.play_turn(ctx.empty_state(), 0, rng);
    CHECK(turn.update.proposer_additions.empty());
    CHECK(turn.update.partner_additions == std::vector<int>{0});
  }
  SUBCASE("flip of an already-committed slot") {
    const CommitmentState state =
        GameContext(game).with_slots(GameContext(game).empty_state(),
                                     std::vector<int>{0}, 1);
    ScriptedTransport transport = ScriptedTransport::from_json(one_shot_script(
        nlohmann::json{{"partner", 1},
                       {"proposer_additions", nlohmann::json::array({1})},
                       {"partner_additions", nlohmann::json::array({1, 0})}}));
    LlmNegotiator negotiator(ctx, config, transport, [](double) {});
    Rng rng(3);
    const LlmTurn turn = negotiator.play_turn(state, 0, rng);
    CHECK(turn.update.proposer_additions.empty());  // slot already committed
    CHECK(turn.update.partner_additions == std::vector<int>{0});
  }
}

TEST_CASE("retry schedule: attempts and backoff waits match the config") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  LlmClientConfig config;
  config.max_retries = 3;
  config.backoff_base = 0.5;
  config.backoff_factor = 2.0;
  config.backoff_jitter = 0.1;
  ScriptedTransport transport = ScriptedTransport::from_json(
      nlohmann::json::array({nlohmann::json{{"transport_error", "connection refused"}}}).dump());
  std::vector<double> waits;
  LlmNegotiator negotiator(ctx, config, transport, [&](double s) { waits.push_back(s); });
  Rng rng(5);
  const LlmTurn turn = negotiator.play_turn(ctx.empty_state(), 0, rng);
  CHECK(turn.degraded);
  CHECK(turn.update.empty());
  CHECK(turn.attempts == config.max_retries + 1);
  REQUIRE(waits.size() == static_cast<std::size_t>(config.max_retries));
  for (int i = 0; i < config.max_retries; ++i) {
    const double nominal = config.backoff_base * std::pow(config.backoff_factor, i);
    CHECK(std::abs(waits[i] - nominal) <= config.backoff_jitter * nominal + 1e-12);
  }
  CHECK(transport.requests().size() == 4);
}

TEST_CASE("malformed replies count as retryable failures") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  LlmClientConfig config;
  config.max_retries = 1;
  ScriptedTransport transport = ScriptedTransport::from_json(
      nlohmann::json::array(
          {nlohmann::json{{"body", "not json at all"}},
           wrap_content(nlohmann::json{{"partner", 1},
                                       {"proposer_additions", nlohmann::json::array({1})},
                                       {"partner_additions", nlohmann::json::array({0, 0})}})})
          .dump());
  LlmNegotiator negotiator(ctx, config, transport, [](double) {});
  Rng rng(6);
  const LlmTurn turn = negotiator.play_turn(ctx.empty_state(), 0, rng);
  CHECK_FALSE(turn.degraded);
  CHECK(turn.attempts == 2);
  CHECK(turn.update.proposer_additions == std::vector<int>{0});
}

TEST_CASE("a fully degraded game is all rejections with zero payoffs") {
  const Game game = nt::pill_game();
  const GameContext ctx(game);
  LlmClientConfig config;
  config.max_retries = 0;
  ScriptedTransport transport = ScriptedTransport::from_json(
      nlohmann::json::array({nlohmann::json{{"transport_error", "down"}}}).dump());
  LlmNegotiator negotiator(ctx, config, transport, [](double) {});
  ProtocolConfig protocol;
  protocol.proposer_rounds_per_player = 2;
  const Trace trace = negotiator.play_game(protocol);
  CHECK(trace.turns.size() == 4);
  for (const TurnRecord& r : trace.turns) {
    CHECK_FALSE(r.accepted);
    CHECK_FALSE(r.llm_reply.empty());
  }
  for (const Rational& v : trace.terminal_payoffs) CHECK(v == Rational(0));
  CHECK_FALSE(trace.prompt_version_hash.empty());
}

TEST_CASE("fuzzing adversarial replies never yields an invalid update") {
  Rng rng(139);
  for (int trial = 0; trial < 60; ++trial) {
    const Game game = nt::random_game(rng, 2, 4, 1, 3, 1, 5, 0.3, -10, 10);
    const GameContext ctx(game);
    LlmClientConfig config;
    config.max_retries = 0;
    config.k_llm = 2;

    // adversarial content: random shapes, values, types
    nlohmann::json content;
    switch (rng.below(6)) {
      case 0: content = nlohmann::json{{"partner", -3}}; break;
      case 1:
        content = nlohmann::json{{"partner", 99},
                                 {"proposer_additions", nlohmann::json::array({9, 9, 9})}};
        break;
      case 2: content = nlohmann::json::object(); break;
      case 3:
        content = nlohmann::json{{"partner", 1},
                                 {"proposer_additions", "zap"},
                                 {"partner_additions", nlohmann::json::array({2})}};
        break;
      case 4: {
        nlohmann::json ones = nlohmann::json::array();
        for (int j = 0; j < game.actions_per_player[0]; ++j) ones.push_back(1);
        content = nlohmann::json{{"partner", 1}, {"proposer_additions", ones}};
        break;
      }
      default:
        content = nlohmann::json{{"partner", 0},
                                 {"proposer_additions", nlohmann::json::array()},
                                 {"partner_additions", nlohmann::json::array()}};
    }
    ScriptedTransport transport = ScriptedTransport::from_json(one_shot_script(content));
    LlmNegotiator negotiator(ctx, config, transport, [](double) {});
    Rng turn_rng(trial);
    const CommitmentState state = nt::random_state(ctx, rng, 0.4);
    const LlmTurn turn = negotiator.play_turn(state, 0, turn_rng);

    CHECK(turn.partner >= 1);
    CHECK(turn.partner < game.num_players);
    CHECK(turn.update.proposer_additions.size() <= 2);
    CHECK(turn.update.partner_additions.size() <= 2);
    for (int j : turn.update.proposer_additions) {
      CHECK(j < game.actions_per_player[0]);
      CHECK_FALSE(ctx.is_set(state, ctx.slot_of(0, j)));
    }
    for (int j : turn.update.partner_additions) {
      CHECK(j < game.actions_per_player[turn.partner]);
      CHECK_FALSE(ctx.is_set(state, ctx.slot_of(turn.partner, j)));
    }
  }
}

TEST_CASE("engine acceptance still gates llm proposals") {
  // A proposal that hurts the partner myopically is recorded but not applied.
  Game game;
  game.num_players = 2;
  game.actions_per_player = {1, 1};
  Goal g0;
  g0.id = 0;
  g0.kind = GoalKind::kLinear;
  g0.required = {SlotRef{1, 0}};
  game.goals = {g0};
  game.utilities.num_goals = 1;
  game.utilities.num_players = 2;
  game.utilities.values = {10, -10};
  const GameContext ctx(game);
  LlmClientConfig config;
  ScriptedTransport transport = ScriptedTransport::from_json(one_shot_script(
      nlohmann::json{{"partner", 1},
                     {"proposer_additions", nlohmann::json::array({0})},
                     {"partner_additions", nlohmann::json::array({1})}}));
  LlmNegotiator negotiator(ctx, config, transport, [](double) {});
  ProtocolConfig protocol;
  protocol.proposer_rounds_per_player = 1;
  const Trace trace = negotiator.play_game(protocol);
  CHECK_FALSE(trace.turns[0].accepted);
  CHECK(trace.terminal_payoffs[1] == Rational(0));
}
