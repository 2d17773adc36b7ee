#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "negobench/core.hpp"
#include "negobench/protocol.hpp"
#include "negobench/rng.hpp"

namespace negobench {

struct LlmClientConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "NEGOBENCH_API_KEY";
  int max_retries = 3;
  double backoff_base = 0.5;    // seconds
  double backoff_factor = 2.0;  // retry i waits base * factor^i, +/- jitter
  double backoff_jitter = 0.1;  // fraction of the nominal wait
  double timeout_seconds = 60.0;
  int k_llm = 3;  // per-side commitment budget for model proposals
};

void validate_llm_config(const LlmClientConfig& config);

struct TransportReply {
  bool transport_ok = false;
  int status = 0;
  std::string body;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportReply post(const std::string& request_body) = 0;
};

// Chat-completions POST with bearer auth from the configured environment
// variable.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(const LlmClientConfig& config);
  TransportReply post(const std::string& request_body) override;

 private:
  LlmClientConfig config_;
  std::string scheme_host_;
  std::string path_;
};

// Deterministic local responder driven by a JSON script: an array of
// entries consumed one per request, sticking at the last. Entry forms:
//   {"transport_error": "msg"}            network failure
//   {"status": 500, "body": "..."}        HTTP error
//   {"content": {...}}                    wrapped as a chat completion
//   {"body": "raw"}                       verbatim body (malformed tests)
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::vector<TransportReply> script);
  static ScriptedTransport from_json(const std::string& script_json);
  static ScriptedTransport from_file(const std::string& path);

  TransportReply post(const std::string& request_body) override;
  const std::vector<std::string>& requests() const { return requests_; }

 private:
  std::vector<TransportReply> script_;
  std::size_t cursor_ = 0;
  std::vector<std::string> requests_;
};

struct LlmTurn {
  int partner = -1;
  JointUpdate update;     // validated: monotone, within budget
  std::string raw_reply;  // last response body or transport error
  bool degraded = false;  // retries exhausted; random partner, empty update
  int attempts = 0;
};

// Zero-shot negotiator: three-part prompt (system / static game context /
// dynamic turn context), strict JSON reply schema, post-generation
// validation that overrides invalid components instead of failing.
class LlmNegotiator {
 public:
  LlmNegotiator(const GameContext& ctx, LlmClientConfig config, Transport& transport,
                std::function<void(double)> sleeper = {});

  LlmTurn play_turn(const CommitmentState& state, int proposer, Rng& rng);
  Trace play_game(const ProtocolConfig& protocol);

  std::string system_prompt() const;
  std::string static_context() const;
  std::string dynamic_context(const CommitmentState& state, int proposer) const;

  static const char* prompt_version();
  static std::string prompt_version_hash();

 private:
  std::string request_body(const CommitmentState& state, int proposer) const;
  double backoff_wait(int attempt, Rng& rng) const;

  const GameContext& ctx_;
  LlmClientConfig config_;
  Transport& transport_;
  std::function<void(double)> sleep_;
};

}  // namespace negobench
