#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "negobench/core.hpp"

namespace negobench {

struct TopfileThreshold {
  std::string goal;
  int level = 1;
  std::string country;
  std::string action;
  bool operator==(const TopfileThreshold&) const = default;
};

// Document-grounded negotiation instance: countries, action-level
// commitments, per-country goal valuations, thresholded goal progress,
// and incompatibility constraints.
struct Topfile {
  std::vector<std::string> countries;
  std::map<std::string, std::vector<std::string>> country_actions;
  std::vector<std::string> goals;
  std::map<std::string, std::map<std::string, std::int64_t>> goals_value;  // country -> goal -> value
  std::vector<TopfileThreshold> goal_satisfaction;
  std::vector<std::vector<std::pair<std::string, std::string>>> mutually_exclusive;

  bool operator==(const Topfile&) const = default;
};

Topfile parse_topfile(const std::string& json_text);
Topfile parse_topfile_file(const std::string& path);
std::string serialize_topfile(const Topfile& tf);

struct TopfileConversion {
  Game game;
  std::vector<std::vector<int>> exclusion_slots;
  nlohmann::json name_table;
  std::vector<std::string> warnings;
};

// Each (goal, threshold level) becomes one linear sub-goal carrying an
// equal share of the goal's valuation. Utilities stay integral by scaling
// everything by the lcm of the level counts; the scale is recorded as the
// game's payoff_denom, so reported payoffs land back in valuation units.
TopfileConversion topfile_to_game(const Topfile& tf);

}  // namespace negobench
