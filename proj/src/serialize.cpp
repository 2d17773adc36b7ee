#include "negobench/serialize.hpp"

#include <fstream>
#include <sstream>

namespace negobench {

using nlohmann::json;

json game_to_json(const Game& game) {
  json j;
  j["num_players"] = game.num_players;
  j["actions_per_player"] = game.actions_per_player;
  json goals = json::array();
  for (const Goal& g : game.goals) {
    json goal;
    goal["id"] = g.id;
    goal["kind"] = g.kind == GoalKind::kAllOrNothing ? "all_or_nothing" : "linear";
    json req = json::array();
    for (const SlotRef& r : g.required) req.push_back(json::array({r.player, r.action}));
    goal["required"] = req;
    goals.push_back(goal);
  }
  j["goals"] = goals;
  j["utilities"] = game.utilities.values;  // row-major goals x players
  if (game.payoff_denom != 1) j["payoff_denom"] = game.payoff_denom;
  json prov;
  prov["kind"] = game.provenance.kind.empty() ? "manual" : game.provenance.kind;
  if (game.provenance.kind == "generator") {
    prov["seed"] = game.provenance.seed;
    prov["config_hash"] = game.provenance.config_hash;
    if (!game.provenance.config_json.empty())
      prov["config"] = json::parse(game.provenance.config_json);
  }
  if (!game.provenance.topfile_id.empty()) prov["topfile_id"] = game.provenance.topfile_id;
  if (!game.provenance.pill_pairs.empty()) {
    json pairs = json::array();
    for (const auto& [b, v] : game.provenance.pill_pairs) pairs.push_back(json::array({b, v}));
    prov["pill_pairs"] = pairs;
  }
  j["provenance"] = prov;
  return j;
}

Game game_from_json(const json& j) {
  Game game;
  game.num_players = j.at("num_players").get<int>();
  game.actions_per_player = j.at("actions_per_player").get<std::vector<int>>();
  for (const json& goal : j.at("goals")) {
    Goal g;
    g.id = goal.at("id").get<int>();
    const std::string kind = goal.at("kind").get<std::string>();
    if (kind == "all_or_nothing")
      g.kind = GoalKind::kAllOrNothing;
    else if (kind == "linear")
      g.kind = GoalKind::kLinear;
    else
      throw ValidationError("game: unknown goal kind '" + kind + "'");
    for (const json& r : goal.at("required"))
      g.required.push_back(SlotRef{r.at(0).get<int>(), r.at(1).get<int>()});
    game.goals.push_back(std::move(g));
  }
  game.utilities.num_goals = game.num_goals();
  game.utilities.num_players = game.num_players;
  game.utilities.values = j.at("utilities").get<std::vector<std::int64_t>>();
  game.payoff_denom = j.value("payoff_denom", std::int64_t{1});
  if (j.contains("provenance")) {
    const json& prov = j["provenance"];
    game.provenance.kind = prov.value("kind", std::string{"manual"});
    game.provenance.seed = prov.value("seed", std::uint64_t{0});
    game.provenance.config_hash = prov.value("config_hash", std::string{});
    if (prov.contains("config")) game.provenance.config_json = prov["config"].dump();
    game.provenance.topfile_id = prov.value("topfile_id", std::string{});
    if (prov.contains("pill_pairs"))
      for (const json& p : prov["pill_pairs"])
        game.provenance.pill_pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  }
  validate_game(game);
  return game;
}

std::string game_to_string(const Game& game) { return game_to_json(game).dump(2) + "\n"; }

Game game_from_string(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError("game: malformed JSON");
  return game_from_json(j);
}

Game load_game_file(const std::string& path) { return game_from_string(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << text;
  if (!out) throw ValidationError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json payoffs_to_json(const PayoffVector& v) {
  json j = json::array();
  for (const Rational& r : v) j.push_back(json::array({r.num(), r.den()}));
  return j;
}

PayoffVector payoffs_from_json(const json& j) {
  PayoffVector v;
  for (const json& e : j) v.push_back(Rational(e.at(0).get<std::int64_t>(), e.at(1).get<std::int64_t>()));
  return v;
}

json state_to_json(const GameContext& ctx, const CommitmentState& s) {
  json j;
  j["turn"] = s.turn;
  json committed = json::array();
  for (int slot = 0; slot < ctx.total_slots(); ++slot)
    if (ctx.is_set(s, slot)) {
      const SlotRef r = ctx.slot_ref(slot);
      committed.push_back(json::array({r.player, r.action}));
    }
  j["committed"] = committed;
  return j;
}

CommitmentState state_from_json(const GameContext& ctx, const json& j) {
  std::vector<int> slots;
  for (const json& e : j.at("committed"))
    slots.push_back(ctx.slot_of(e.at(0).get<int>(), e.at(1).get<int>()));
  CommitmentState s = ctx.with_slots(ctx.empty_state(), slots, j.at("turn").get<int>());
  return s;
}

json protocol_config_to_json(const ProtocolConfig& c) {
  json j;
  j["rounds"] = c.proposer_rounds_per_player;
  j["k"] = c.k;
  j["mcts_sims"] = c.mcts_simulations;
  j["mcts_c"] = c.mcts_exploration;
  j["leaf_eval"] = c.leaf_eval == LeafEval::kRawPayoff ? "raw" : "approx";
  j["seed"] = c.seed;
  j["strict_proposer_gain"] = c.require_strict_proposer_gain;
  j["max_offer_candidates"] = c.max_offer_candidates;
  j["max_states"] = c.solver_limits.max_states;
  return j;
}

ProtocolConfig protocol_config_from_json(const json& j) {
  ProtocolConfig c;
  c.proposer_rounds_per_player = j.value("rounds", c.proposer_rounds_per_player);
  c.k = j.value("k", c.k);
  c.mcts_simulations = j.value("mcts_sims", c.mcts_simulations);
  c.mcts_exploration = j.value("mcts_c", c.mcts_exploration);
  const std::string leaf = j.value("leaf_eval", std::string{"approx"});
  if (leaf == "raw")
    c.leaf_eval = LeafEval::kRawPayoff;
  else if (leaf == "approx")
    c.leaf_eval = LeafEval::kApproxValue;
  else
    throw ValidationError("protocol: unknown leaf_eval '" + leaf + "'");
  c.seed = j.value("seed", c.seed);
  c.require_strict_proposer_gain = j.value("strict_proposer_gain", false);
  c.max_offer_candidates = j.value("max_offer_candidates", c.max_offer_candidates);
  c.solver_limits.max_states = j.value("max_states", c.solver_limits.max_states);
  return c;
}

json trace_to_json(const GameContext& ctx, const Trace& trace) {
  json j;
  json prov;
  prov["kind"] = trace.game_provenance.kind;
  prov["seed"] = trace.game_provenance.seed;
  prov["config_hash"] = trace.game_provenance.config_hash;
  prov["topfile_id"] = trace.game_provenance.topfile_id;
  j["game_provenance"] = prov;
  j["method"] = trace.method;
  j["config"] = protocol_config_to_json(trace.config);
  if (!trace.prompt_version_hash.empty()) j["prompt_version_hash"] = trace.prompt_version_hash;
  json turns = json::array();
  for (const TurnRecord& r : trace.turns) {
    json t;
    t["turn"] = r.turn;
    t["proposer"] = r.proposer;
    if (r.partner) t["partner"] = *r.partner;
    if (r.offer) {
      t["offer"] = json{{"proposer_additions", r.offer->proposer_additions},
                        {"partner_additions", r.offer->partner_additions}};
    }
    t["accepted"] = r.accepted;
    t["state_after"] = state_to_json(ctx, r.state_after);
    if (!r.llm_reply.empty()) t["llm_reply"] = r.llm_reply;
    turns.push_back(std::move(t));
  }
  j["turns"] = turns;
  j["terminal_payoffs"] = payoffs_to_json(trace.terminal_payoffs);
  return j;
}

Trace trace_from_json(const GameContext& ctx, const json& j) {
  Trace trace;
  const json& prov = j.at("game_provenance");
  trace.game_provenance.kind = prov.value("kind", std::string{});
  trace.game_provenance.seed = prov.value("seed", std::uint64_t{0});
  trace.game_provenance.config_hash = prov.value("config_hash", std::string{});
  trace.game_provenance.topfile_id = prov.value("topfile_id", std::string{});
  trace.method = j.at("method").get<std::string>();
  trace.config = protocol_config_from_json(j.at("config"));
  trace.prompt_version_hash = j.value("prompt_version_hash", std::string{});
  for (const json& t : j.at("turns")) {
    TurnRecord r;
    r.turn = t.at("turn").get<int>();
    r.proposer = t.at("proposer").get<int>();
    if (t.contains("partner")) r.partner = t["partner"].get<int>();
    if (t.contains("offer")) {
      JointUpdate u;
      u.proposer_additions = t["offer"].at("proposer_additions").get<std::vector<int>>();
      u.partner_additions = t["offer"].at("partner_additions").get<std::vector<int>>();
      r.offer = std::move(u);
    }
    r.accepted = t.at("accepted").get<bool>();
    r.state_after = state_from_json(ctx, t.at("state_after"));
    r.llm_reply = t.value("llm_reply", std::string{});
    trace.turns.push_back(std::move(r));
  }
  trace.terminal_payoffs = payoffs_from_json(j.at("terminal_payoffs"));
  return trace;
}

std::string trace_to_string(const GameContext& ctx, const Trace& trace) {
  return trace_to_json(ctx, trace).dump(2) + "\n";
}

PayoffVector trace_terminal_payoffs(const json& trace_json) {
  return payoffs_from_json(trace_json.at("terminal_payoffs"));
}

json exclusions_to_json(const GameContext& ctx, const std::vector<std::vector<int>>& slot_sets) {
  json sets = json::array();
  for (const auto& set : slot_sets) {
    json s = json::array();
    for (int slot : set) {
      const SlotRef r = ctx.slot_ref(slot);
      s.push_back(json::array({r.player, r.action}));
    }
    sets.push_back(s);
  }
  return json{{"mutually_exclusive", sets}};
}

std::vector<std::vector<int>> exclusions_from_json(const GameContext& ctx, const json& j) {
  std::vector<std::vector<int>> out;
  for (const json& set : j.at("mutually_exclusive")) {
    std::vector<int> slots;
    for (const json& m : set) slots.push_back(ctx.slot_of(m.at(0).get<int>(), m.at(1).get<int>()));
    out.push_back(std::move(slots));
  }
  return out;
}

}  // namespace negobench
