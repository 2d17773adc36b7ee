#pragma once

#include <string>

#include "json.hpp"
#include "negobench/core.hpp"
#include "negobench/protocol.hpp"

namespace negobench {

nlohmann::json game_to_json(const Game& game);
Game game_from_json(const nlohmann::json& j);
// Canonical serialization: byte-stable for a fixed game.
std::string game_to_string(const Game& game);
Game game_from_string(const std::string& text);
Game load_game_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

nlohmann::json payoffs_to_json(const PayoffVector& v);
PayoffVector payoffs_from_json(const nlohmann::json& j);

nlohmann::json state_to_json(const GameContext& ctx, const CommitmentState& s);
CommitmentState state_from_json(const GameContext& ctx, const nlohmann::json& j);

nlohmann::json protocol_config_to_json(const ProtocolConfig& c);
ProtocolConfig protocol_config_from_json(const nlohmann::json& j);

nlohmann::json trace_to_json(const GameContext& ctx, const Trace& trace);
Trace trace_from_json(const GameContext& ctx, const nlohmann::json& j);
std::string trace_to_string(const GameContext& ctx, const Trace& trace);
// Terminal payoffs only; enough for comparisons without the game.
PayoffVector trace_terminal_payoffs(const nlohmann::json& trace_json);

nlohmann::json exclusions_to_json(const GameContext& ctx,
                                  const std::vector<std::vector<int>>& slot_sets);
std::vector<std::vector<int>> exclusions_from_json(const GameContext& ctx,
                                                   const nlohmann::json& j);

}  // namespace negobench
