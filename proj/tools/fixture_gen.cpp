// Generates the bundled topfile fixtures deterministically. Run from the
// repo root:  negobench-fixturegen [out_dir]
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "negobench/rng.hpp"
#include "negobench/serialize.hpp"
#include "negobench/topfile.hpp"

using namespace negobench;

namespace {

const std::vector<std::string> kCountryPool = {
    "Aldovia",  "Brontia",   "Cascabel", "Dorwin",    "Elbasan",  "Ferronia", "Galdur",
    "Hesperia", "Ilmatar",   "Jorvik",   "Kestrelia", "Lusern",   "Meridova", "Nortwal",
    "Oberlund", "Pelagia",   "Quintara", "Rovenia",   "Sundvik",  "Tarquin",  "Umbria",
    "Veldany",  "Westmarch", "Xanthe",   "Ygdria",    "Zephyros",
};

const std::vector<std::string> kActionPool = {
    "phase out coal plants",    "expand solar capacity",   "fund reforestation",
    "cap methane output",       "launch a carbon market",  "share grid technology",
    "protect wetlands",         "electrify transport",     "subsidize retrofits",
    "publish emission data",    "halt new drilling",       "finance adaptation",
    "restore mangroves",        "adopt efficiency codes",  "open green-tech patents",
    "tax aviation fuel",        "build storage capacity",  "train energy auditors",
};

const std::vector<std::string> kGoalPool = {
    "cut power-sector emissions", "protect coastal buffers",   "accelerate renewables",
    "reduce industrial methane",  "green the transport fleet", "fund loss and damage",
    "halt deforestation",         "price carbon regionally",   "harden water systems",
    "share clean technology",     "retire diesel fleets",      "expand early warning",
    "decarbonize heating",        "restore degraded land",     "audit fossil subsidies",
};

std::string action_name(int index) {
  const std::string base = kActionPool[index % kActionPool.size()];
  const int round = index / static_cast<int>(kActionPool.size());
  return round == 0 ? base : base + " (phase " + std::to_string(round + 1) + ")";
}

std::string goal_name(int index) {
  const std::string base = kGoalPool[index % kGoalPool.size()];
  const int round = index / static_cast<int>(kGoalPool.size());
  return round == 0 ? base : base + " " + std::to_string(round + 1);
}

Topfile make_fixture(std::uint64_t seed, int num_countries, int actions_per_country,
                     int num_goals, int max_levels) {
  Rng root(seed);
  Topfile tf;
  for (int c = 0; c < num_countries; ++c) tf.countries.push_back(kCountryPool[c]);
  for (int c = 0; c < num_countries; ++c) {
    std::vector<std::string> actions;
    for (int a = 0; a < actions_per_country; ++a) actions.push_back(action_name(a));
    tf.country_actions[tf.countries[c]] = actions;
  }
  for (int g = 0; g < num_goals; ++g) tf.goals.push_back(goal_name(g));

  // Thresholded structure: each level needs a couple of cross-country
  // actions; an action may feed several goals.
  Rng structure = root.stream("structure");
  for (int g = 0; g < num_goals; ++g) {
    const int levels = 1 + static_cast<int>(structure.below(max_levels));
    std::set<std::pair<int, int>> used;  // (country, action) once per goal
    for (int level = 1; level <= levels; ++level) {
      const int tuples = 1 + static_cast<int>(structure.below(3));
      for (int t = 0; t < tuples; ++t) {
        for (int attempt = 0; attempt < 20; ++attempt) {
          const int c = static_cast<int>(structure.below(num_countries));
          const int a = static_cast<int>(structure.below(actions_per_country));
          if (used.insert({c, a}).second) {
            tf.goal_satisfaction.push_back(
                TopfileThreshold{tf.goals[g], level, tf.countries[c], action_name(a)});
            break;
          }
        }
      }
    }
  }
  // Drop goals that ended up with no tuples at level 1 (cannot happen with
  // the loop above, but keep the invariant obvious).

  // Positive-dominated valuations: sparse, mostly positive, a few mild
  // negatives. Contributing countries are not preferentially the ones who
  // value a goal, which is what gives negotiation room over unilateral play.
  Rng values = root.stream("values");
  for (int c = 0; c < num_countries; ++c) {
    std::map<std::string, std::int64_t> row;
    for (int g = 0; g < num_goals; ++g) {
      const double u = values.next_double();
      if (u < 0.45)
        row[tf.goals[g]] = 1 + static_cast<std::int64_t>(values.below(10));
      else if (u < 0.53)
        row[tf.goals[g]] = -1 - static_cast<std::int64_t>(values.below(3));
    }
    if (!row.empty()) tf.goals_value[tf.countries[c]] = std::move(row);
  }

  // A few incompatible action pairs across countries.
  Rng excl = root.stream("exclusions");
  const int sets = std::max(1, num_countries / 6);
  std::set<std::pair<int, int>> taken;
  for (int s = 0; s < sets; ++s) {
    const int c1 = static_cast<int>(excl.below(num_countries));
    int c2 = static_cast<int>(excl.below(num_countries));
    if (c2 == c1) c2 = (c1 + 1) % num_countries;
    const int a1 = static_cast<int>(excl.below(actions_per_country));
    const int a2 = static_cast<int>(excl.below(actions_per_country));
    if (!taken.insert({c1 * 100 + a1, c2 * 100 + a2}).second) continue;
    tf.mutually_exclusive.push_back(
        {{tf.countries[c1], action_name(a1)}, {tf.countries[c2], action_name(a2)}});
  }
  return tf;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "fixtures/topfiles";
  std::filesystem::create_directories(out_dir);

  const Topfile main_fixture = make_fixture(/*seed=*/20240811, /*countries=*/22,
                                            /*actions=*/8, /*goals=*/45, /*max_levels=*/3);
  write_text_file(out_dir + "/climate_22.json", serialize_topfile(main_fixture));
  std::cout << "wrote " << out_dir << "/climate_22.json\n";

  for (int i = 1; i <= 5; ++i) {
    const Topfile tf = make_fixture(/*seed=*/777000 + i, /*countries=*/9, /*actions=*/5,
                                    /*goals=*/14, /*max_levels=*/2);
    const std::string path = out_dir + "/synth_posdom_" + std::to_string(i) + ".json";
    write_text_file(path, serialize_topfile(tf));
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}
