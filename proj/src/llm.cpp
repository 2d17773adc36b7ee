#include "negobench/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#ifdef NEGOBENCH_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

namespace negobench {

using nlohmann::json;

void validate_llm_config(const LlmClientConfig& config) {
  if (config.max_retries < 0) throw ValidationError("llm: max_retries must be >= 0");
  if (config.k_llm < 1) throw ValidationError("llm: k_llm must be >= 1");
  if (config.backoff_base < 0 || config.backoff_factor < 0 || config.backoff_jitter < 0)
    throw ValidationError("llm: backoff parameters must be non-negative");
}

// ---------------------------------------------------------------------------
// Transports
// ---------------------------------------------------------------------------

HttpTransport::HttpTransport(const LlmClientConfig& config) : config_(config) {
  const std::string& url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ValidationError("llm: endpoint must be an http(s) URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_ = path_start == std::string::npos ? url : url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
#ifndef NEGOBENCH_HAVE_OPENSSL
  if (url.rfind("https://", 0) == 0)
    throw ExternalServiceError("llm: this build lacks TLS support; use an http endpoint");
#endif
}

TransportReply HttpTransport::post(const std::string& request_body) {
  httplib::Client client(scheme_host_);
  client.set_connection_timeout(std::chrono::milliseconds(
      static_cast<int>(config_.timeout_seconds * 1000)));
  client.set_read_timeout(std::chrono::milliseconds(
      static_cast<int>(config_.timeout_seconds * 1000)));
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0')
    headers.emplace("Authorization", std::string("Bearer ") + key);
  auto res = client.Post(path_, headers, request_body, "application/json");
  TransportReply reply;
  if (!res) {
    reply.error = "transport failure: " + httplib::to_string(res.error());
    return reply;
  }
  reply.transport_ok = true;
  reply.status = res->status;
  reply.body = res->body;
  return reply;
}

ScriptedTransport::ScriptedTransport(std::vector<TransportReply> script)
    : script_(std::move(script)) {
  if (script_.empty()) throw ValidationError("llm mock: empty script");
}

ScriptedTransport ScriptedTransport::from_json(const std::string& script_json) {
  json doc = json::parse(script_json);
  if (!doc.is_array()) throw ValidationError("llm mock: script must be a JSON array");
  std::vector<TransportReply> script;
  for (const json& entry : doc) {
    TransportReply r;
    if (entry.contains("transport_error")) {
      r.error = entry["transport_error"].get<std::string>();
    } else if (entry.contains("content")) {
      r.transport_ok = true;
      r.status = 200;
      json body;
      body["choices"] = json::array(
          {json{{"message", json{{"role", "assistant"},
                                 {"content", entry["content"].dump()}}}}});
      r.body = body.dump();
    } else {
      r.transport_ok = true;
      r.status = entry.value("status", 200);
      r.body = entry.value("body", std::string{});
    }
    script.push_back(std::move(r));
  }
  return ScriptedTransport(std::move(script));
}

ScriptedTransport ScriptedTransport::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("llm mock: cannot open script file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

TransportReply ScriptedTransport::post(const std::string& request_body) {
  requests_.push_back(request_body);
  const TransportReply& r = script_[std::min(cursor_, script_.size() - 1)];
  ++cursor_;
  return r;
}

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kPromptVersion = "negotiator-prompt-v1";

constexpr const char* kSystemTemplate = R"(You are an expert strategic negotiator in a multi-party commitment game.
Objectives, in order:
1. Maximize the terminal reward of the proposer you are playing for.
2. Offer a deal the selected partner rationally accepts: the partner's position after the deal must be at least as good as after rejecting it.

Rules:
- Commitments are binding. You may only flip entries from 0 to 1, never back.
- You may add at most {K} new commitments for the proposer and at most {K} for the partner in one proposal.
- Reply with a single JSON object, no prose, matching exactly:
  {"partner": <player index>, "proposer_additions": <0/1 list, one entry per proposer action>, "partner_additions": <0/1 list, one entry per partner action>}
- A 1 in an additions list marks an action newly committed by this deal. Entries for already-committed actions must stay 0.)";

}  // namespace

const char* LlmNegotiator::prompt_version() { return kPromptVersion; }

std::string LlmNegotiator::prompt_version_hash() {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(std::string(kPromptVersion) + kSystemTemplate)));
  return std::string(buf);
}

LlmNegotiator::LlmNegotiator(const GameContext& ctx, LlmClientConfig config, Transport& transport,
                             std::function<void(double)> sleeper)
    : ctx_(ctx), config_(std::move(config)), transport_(transport), sleep_(std::move(sleeper)) {
  validate_llm_config(config_);
  if (!sleep_)
    sleep_ = [](double seconds) {
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    };
}

std::string LlmNegotiator::system_prompt() const {
  std::string text = kSystemTemplate;
  const std::string k = std::to_string(config_.k_llm);
  for (std::size_t pos = text.find("{K}"); pos != std::string::npos; pos = text.find("{K}"))
    text.replace(pos, 3, k);
  return text;
}

std::string LlmNegotiator::static_context() const {
  json j;
  j["num_players"] = ctx_.num_players();
  j["proposer_order"] = "round-robin by player index";
  j["actions_per_player"] = ctx_.game().actions_per_player;
  json utilities = json::array();
  for (int g = 0; g < ctx_.num_goals(); ++g) {
    json row = json::array();
    for (int n = 0; n < ctx_.num_players(); ++n) row.push_back(ctx_.game().utilities.at(g, n));
    utilities.push_back(row);
  }
  j["goal_values"] = utilities;
  json goals = json::array();
  for (const Goal& g : ctx_.game().goals) {
    json goal;
    goal["id"] = g.id;
    goal["kind"] = g.kind == GoalKind::kAllOrNothing ? "all_or_nothing" : "linear";
    json req = json::array();
    for (const SlotRef& r : g.required) req.push_back(json::array({r.player, r.action}));
    goal["required"] = req;
    goals.push_back(goal);
  }
  j["goals"] = goals;
  return "Game (fixed for the whole negotiation):\n" + j.dump();
}

std::string LlmNegotiator::dynamic_context(const CommitmentState& state, int proposer) const {
  json j;
  j["turn"] = state.turn;
  j["proposer"] = proposer;
  json matrix = json::array();
  for (int n = 0; n < ctx_.num_players(); ++n) {
    json row = json::array();
    for (int a = 0; a < ctx_.game().actions_per_player[n]; ++a)
      row.push_back(ctx_.is_set(state, ctx_.slot_of(n, a)) ? 1 : 0);
    matrix.push_back(row);
  }
  j["commitments"] = matrix;
  return "Current turn:\n" + j.dump();
}

std::string LlmNegotiator::request_body(const CommitmentState& state, int proposer) const {
  json body;
  body["model"] = config_.model;
  body["messages"] = json::array({
      json{{"role", "system"}, {"content", system_prompt()}},
      json{{"role", "user"}, {"content", static_context()}},
      json{{"role", "user"}, {"content", dynamic_context(state, proposer)}},
  });
  body["response_format"] = json{{"type", "json_object"}};
  return body.dump();
}

double LlmNegotiator::backoff_wait(int attempt, Rng& rng) const {
  const double nominal = config_.backoff_base * std::pow(config_.backoff_factor, attempt);
  const double jitter = config_.backoff_jitter * nominal * (2.0 * rng.next_double() - 1.0);
  return std::max(0.0, nominal + jitter);
}

namespace {

// Parses the chat-completion body down to the model's JSON object.
// Returns false for anything that should count as a retryable failure.
bool parse_reply(const std::string& body, json& out) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return false;
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
    return false;
  const json& msg = doc["choices"][0];
  if (!msg.contains("message") || !msg["message"].contains("content")) return false;
  if (!msg["message"]["content"].is_string()) return false;
  json content = json::parse(msg["message"]["content"].get<std::string>(), nullptr, false);
  if (content.is_discarded() || !content.is_object()) return false;
  out = std::move(content);
  return true;
}

}  // namespace

LlmTurn LlmNegotiator::play_turn(const CommitmentState& state, int proposer, Rng& rng) {
  LlmTurn turn;
  const std::string request = request_body(state, proposer);

  json reply;
  bool have_reply = false;
  Rng backoff_rng = rng.stream("backoff");
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    turn.attempts = attempt + 1;
    const TransportReply r = transport_.post(request);
    turn.raw_reply = r.transport_ok ? r.body : r.error;
    if (r.transport_ok && r.status == 200 && parse_reply(r.body, reply)) {
      have_reply = true;
      break;
    }
    if (attempt < config_.max_retries) sleep_(backoff_wait(attempt, backoff_rng));
  }

  auto random_partner = [&]() {
    const int np = ctx_.num_players();
    int r = static_cast<int>(rng.below(np - 1));
    if (r >= proposer) ++r;
    return r;
  };

  if (!have_reply) {
    turn.degraded = true;
    turn.partner = random_partner();
    return turn;
  }

  // Partner component.
  const int np = ctx_.num_players();
  int partner = -1;
  if (reply.contains("partner") && reply["partner"].is_number_integer())
    partner = reply["partner"].get<int>();
  if (partner < 0 || partner >= np || partner == proposer) partner = random_partner();
  turn.partner = partner;

  // Action components: full 0/1 vectors, one per side; an invalid side is
  // overridden with the zero vector.
  auto additions_for = [&](const char* field, int player) {
    std::vector<int> out;
    if (!reply.contains(field) || !reply[field].is_array()) return out;
    const json& vec = reply[field];
    if (static_cast<int>(vec.size()) != ctx_.game().actions_per_player[player]) return out;
    std::vector<int> adds;
    for (int j = 0; j < static_cast<int>(vec.size()); ++j) {
      if (!vec[j].is_number_integer()) return out;
      const int v = vec[j].get<int>();
      if (v != 0 && v != 1) return out;
      if (v == 1) {
        if (ctx_.is_set(state, ctx_.slot_of(player, j))) return out;  // 1->1 is not a flip
        adds.push_back(j);
      }
    }
    if (static_cast<int>(adds.size()) > config_.k_llm) return out;
    return adds;
  };
  turn.update.proposer_additions = additions_for("proposer_additions", proposer);
  turn.update.partner_additions = additions_for("partner_additions", partner);
  return turn;
}

Trace LlmNegotiator::play_game(const ProtocolConfig& protocol) {
  validate_protocol_config(protocol);
  const int np = ctx_.num_players();
  const int horizon = protocol.horizon(np);
  const Rng root(protocol.seed);

  Trace trace;
  trace.game_provenance = ctx_.game().provenance;
  trace.method = "llm";
  trace.config = protocol;
  trace.prompt_version_hash = prompt_version_hash();

  CommitmentState state = ctx_.empty_state();
  for (int t = 0; t < horizon; ++t) {
    const int proposer = t % np;
    Rng turn_rng = root.stream("llm_turn").stream(static_cast<std::uint64_t>(t));
    LlmTurn llm = play_turn(state, proposer, turn_rng);

    TurnRecord record;
    record.turn = t;
    record.proposer = proposer;
    record.partner = llm.partner;
    record.llm_reply = llm.raw_reply;

    bool accepted = false;
    if (!llm.update.empty()) {
      const CommitmentState post =
          apply_update(ctx_, state, proposer, llm.partner, llm.update, t + 1);
      if (!ctx_.violates_exclusions(post)) {
        // The engine, not the model, decides acceptance: the partner's
        // myopic reward must weakly improve.
        if (ctx_.scaled_ok()) {
          const std::int64_t before =
              evaluate_scaled_for(ctx_, ValueKind::kReward, {}, state, llm.partner);
          const std::int64_t after =
              evaluate_scaled_for(ctx_, ValueKind::kReward, {}, post, llm.partner);
          accepted = after >= before;
        } else {
          accepted = reward_vector(ctx_, post)[llm.partner] >=
                     reward_vector(ctx_, state)[llm.partner];
        }
        if (accepted) {
          record.offer = llm.update;
          state = post;
        }
      }
    }
    record.accepted = accepted;
    if (!accepted) state.turn = t + 1;
    record.state_after = state;
    trace.turns.push_back(std::move(record));
  }

  trace.terminal_payoffs = reward_vector(ctx_, state);
  return trace;
}

}  // namespace negobench
