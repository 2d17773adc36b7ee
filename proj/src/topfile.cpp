#include "negobench/topfile.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "negobench/rng.hpp"

namespace negobench {

using nlohmann::json;

namespace {

json must_get(const json& doc, const char* key) {
  if (!doc.contains(key))
    throw ValidationError(std::string("topfile: missing key '") + key + "'");
  return doc[key];
}

}  // namespace

Topfile parse_topfile(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    throw ValidationError("topfile: document is not a JSON object");

  Topfile tf;
  for (const json& c : must_get(doc, "countries")) tf.countries.push_back(c.get<std::string>());
  {
    std::set<std::string> seen;
    for (const std::string& c : tf.countries)
      if (!seen.insert(c).second) throw ValidationError("topfile: duplicate country '" + c + "'");
  }
  auto known_country = [&](const std::string& c) {
    return std::find(tf.countries.begin(), tf.countries.end(), c) != tf.countries.end();
  };

  const json country_actions_doc = must_get(doc, "country_actions");
  for (const auto& [country, actions] : country_actions_doc.items()) {
    if (!known_country(country))
      throw ValidationError("topfile: country_actions names undeclared country '" + country + "'");
    std::vector<std::string> list;
    std::set<std::string> seen;
    for (const json& a : actions) {
      std::string name = a.get<std::string>();
      if (!seen.insert(name).second)
        throw ValidationError("topfile: duplicate action '" + name + "' for country '" + country +
                              "'");
      list.push_back(std::move(name));
    }
    tf.country_actions[country] = std::move(list);
  }

  for (const json& g : must_get(doc, "goals")) tf.goals.push_back(g.get<std::string>());
  {
    std::set<std::string> seen;
    for (const std::string& g : tf.goals)
      if (!seen.insert(g).second) throw ValidationError("topfile: duplicate goal '" + g + "'");
  }
  auto known_goal = [&](const std::string& g) {
    return std::find(tf.goals.begin(), tf.goals.end(), g) != tf.goals.end();
  };
  auto known_action = [&](const std::string& c, const std::string& a) {
    auto it = tf.country_actions.find(c);
    if (it == tf.country_actions.end()) return false;
    return std::find(it->second.begin(), it->second.end(), a) != it->second.end();
  };

  if (doc.contains("country_data")) {
    for (const auto& [country, data] : doc["country_data"].items()) {
      if (!known_country(country))
        throw ValidationError("topfile: country_data names undeclared country '" + country + "'");
      if (!data.contains("goals_value")) continue;
      std::map<std::string, std::int64_t> values;
      for (const auto& [goal, v] : data["goals_value"].items()) {
        if (!known_goal(goal))
          throw ValidationError("topfile: goals_value names undeclared goal '" + goal +
                                "' for country '" + country + "'");
        values[goal] = v.get<std::int64_t>();
      }
      tf.goals_value[country] = std::move(values);
    }
  }

  for (const json& t : must_get(doc, "goal_satisfaction")) {
    if (!t.is_array() || t.size() != 4)
      throw ValidationError("topfile: goal_satisfaction entries are [goal, level, country, action]");
    TopfileThreshold th;
    th.goal = t[0].get<std::string>();
    th.level = t[1].get<int>();
    th.country = t[2].get<std::string>();
    th.action = t[3].get<std::string>();
    if (!known_goal(th.goal))
      throw ValidationError("topfile: goal_satisfaction names undeclared goal '" + th.goal + "'");
    if (!known_country(th.country))
      throw ValidationError("topfile: goal_satisfaction names undeclared country '" + th.country +
                            "'");
    if (!known_action(th.country, th.action))
      throw ValidationError("topfile: goal_satisfaction names unknown action '" + th.action +
                            "' of country '" + th.country + "'");
    if (th.level < 1)
      throw ValidationError("topfile: threshold level must be >= 1 for goal '" + th.goal + "'");
    tf.goal_satisfaction.push_back(std::move(th));
  }

  // Levels per goal must be consecutive starting at 1.
  {
    std::map<std::string, std::set<int>> levels;
    for (const TopfileThreshold& t : tf.goal_satisfaction) levels[t.goal].insert(t.level);
    for (const auto& [goal, ls] : levels) {
      int expect = 1;
      for (int l : ls) {
        if (l != expect)
          throw ValidationError("topfile: malformed thresholds for goal '" + goal +
                                "' (levels must be consecutive from 1)");
        ++expect;
      }
    }
  }
  // Duplicate (goal, level, country, action) tuples are meaningless.
  {
    std::set<std::tuple<std::string, int, std::string, std::string>> seen;
    for (const TopfileThreshold& t : tf.goal_satisfaction)
      if (!seen.insert({t.goal, t.level, t.country, t.action}).second)
        throw ValidationError("topfile: duplicate goal_satisfaction tuple for goal '" + t.goal +
                              "'");
  }

  if (doc.contains("mutually_exclusive_agreements")) {
    for (const json& set : doc["mutually_exclusive_agreements"]) {
      std::vector<std::pair<std::string, std::string>> members;
      for (const json& m : set) {
        if (!m.is_array() || m.size() != 2)
          throw ValidationError("topfile: mutually exclusive members are [country, action]");
        std::string c = m[0].get<std::string>();
        std::string a = m[1].get<std::string>();
        if (!known_country(c) || !known_action(c, a))
          throw ValidationError("topfile: mutually exclusive member (" + c + ", " + a +
                                ") does not resolve");
        members.push_back({std::move(c), std::move(a)});
      }
      if (members.size() < 2)
        throw ValidationError("topfile: mutually exclusive sets need at least 2 members");
      std::set<std::pair<std::string, std::string>> uniq(members.begin(), members.end());
      if (uniq.size() != members.size())
        throw ValidationError("topfile: duplicate member inside a mutually exclusive set");
      tf.mutually_exclusive.push_back(std::move(members));
    }
  }
  return tf;
}

Topfile parse_topfile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("topfile: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_topfile(buf.str());
}

std::string serialize_topfile(const Topfile& tf) {
  json doc;
  doc["countries"] = tf.countries;
  json actions = json::object();
  for (const auto& [c, list] : tf.country_actions) actions[c] = list;
  doc["country_actions"] = actions;
  doc["goals"] = tf.goals;
  json data = json::object();
  for (const auto& [c, values] : tf.goals_value) {
    json gv = json::object();
    for (const auto& [g, v] : values) gv[g] = v;
    data[c]["goals_value"] = gv;
  }
  doc["country_data"] = data;
  json sat = json::array();
  for (const TopfileThreshold& t : tf.goal_satisfaction)
    sat.push_back(json::array({t.goal, t.level, t.country, t.action}));
  doc["goal_satisfaction"] = sat;
  json mx = json::array();
  for (const auto& set : tf.mutually_exclusive) {
    json s = json::array();
    for (const auto& [c, a] : set) s.push_back(json::array({c, a}));
    mx.push_back(s);
  }
  doc["mutually_exclusive_agreements"] = mx;
  return doc.dump(2) + "\n";
}

TopfileConversion topfile_to_game(const Topfile& tf) {
  TopfileConversion out;
  Game& game = out.game;
  game.num_players = static_cast<int>(tf.countries.size());
  if (game.num_players < 2) throw ValidationError("topfile: need at least 2 countries");

  std::map<std::string, int> country_index;
  for (int i = 0; i < game.num_players; ++i) country_index[tf.countries[i]] = i;
  game.actions_per_player.resize(game.num_players, 0);
  std::map<std::string, std::map<std::string, int>> action_index;
  for (const std::string& c : tf.countries) {
    auto it = tf.country_actions.find(c);
    const std::vector<std::string>& list =
        it == tf.country_actions.end() ? std::vector<std::string>{} : it->second;
    game.actions_per_player[country_index[c]] = static_cast<int>(list.size());
    for (int j = 0; j < static_cast<int>(list.size()); ++j) action_index[c][list[j]] = j;
  }

  // Tuples per (goal, level), preserving file order inside a level.
  std::map<std::string, std::map<int, std::vector<SlotRef>>> per_goal;
  for (const TopfileThreshold& t : tf.goal_satisfaction)
    per_goal[t.goal][t.level].push_back(
        SlotRef{country_index[t.country], action_index[t.country][t.action]});

  // Equal split across levels; scale by the lcm of level counts to keep
  // utilities integral.
  std::int64_t scale = 1;
  for (const std::string& g : tf.goals) {
    auto it = per_goal.find(g);
    if (it == per_goal.end()) continue;
    scale = std::lcm(scale, static_cast<std::int64_t>(it->second.size()));
  }
  game.payoff_denom = scale;

  json name_goals = json::array();
  std::vector<std::pair<std::string, int>> sub_goals;  // (goal name, level count)
  for (const std::string& g : tf.goals) {
    auto it = per_goal.find(g);
    if (it == per_goal.end()) {
      bool valued = false;
      for (const auto& [c, values] : tf.goals_value)
        if (values.count(g) && values.at(g) != 0) valued = true;
      if (valued)
        out.warnings.push_back("goal '" + g +
                               "' has valuations but no satisfaction tuples; it carries zero "
                               "weight and is dropped");
      continue;
    }
    const int num_levels = static_cast<int>(it->second.size());
    for (const auto& [level, slots] : it->second) {
      Goal goal;
      goal.id = static_cast<int>(game.goals.size());
      goal.kind = GoalKind::kLinear;
      goal.required = slots;
      game.goals.push_back(std::move(goal));
      sub_goals.push_back({g, num_levels});
      name_goals.push_back(json{{"id", game.goals.back().id},
                                {"goal", g},
                                {"level", level},
                                {"levels", num_levels}});
    }
  }
  if (game.goals.empty()) throw ValidationError("topfile: no goal has satisfaction tuples");

  game.utilities.num_goals = static_cast<int>(game.goals.size());
  game.utilities.num_players = game.num_players;
  game.utilities.values.assign(
      static_cast<std::size_t>(game.utilities.num_goals) * game.num_players, 0);
  for (int gi = 0; gi < game.utilities.num_goals; ++gi) {
    const auto& [goal_name, num_levels] = sub_goals[gi];
    for (const std::string& c : tf.countries) {
      std::int64_t value = 0;
      auto itc = tf.goals_value.find(c);
      if (itc != tf.goals_value.end()) {
        auto itg = itc->second.find(goal_name);
        if (itg != itc->second.end()) value = itg->second;
      }
      game.utilities.at(gi, country_index[c]) = value * (scale / num_levels);
    }
  }

  game.provenance.kind = "topfile";
  {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(serialize_topfile(tf))));
    game.provenance.topfile_id = buf;
  }
  validate_game(game);

  // Exclusion sets as flat slot indices (offsets match GameContext).
  std::vector<int> offsets(game.num_players, 0);
  for (int n = 1; n < game.num_players; ++n)
    offsets[n] = offsets[n - 1] + game.actions_per_player[n - 1];
  for (const auto& set : tf.mutually_exclusive) {
    std::vector<int> slots;
    for (const auto& [c, a] : set)
      slots.push_back(offsets[country_index[c]] + action_index[c][a]);
    out.exclusion_slots.push_back(std::move(slots));
  }

  out.name_table = json{{"players", tf.countries}, {"goals", name_goals}};
  json action_names = json::object();
  for (const std::string& c : tf.countries) {
    auto it = tf.country_actions.find(c);
    action_names[c] = it == tf.country_actions.end() ? std::vector<std::string>{} : it->second;
  }
  out.name_table["actions"] = action_names;
  return out;
}

}  // namespace negobench
