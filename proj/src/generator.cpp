#include "negobench/generator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace negobench {

std::string to_string(Alignment a) {
  return a == Alignment::kCooperative ? "cooperative" : "adversarial";
}

std::string to_string(PayoffRegime r) {
  switch (r) {
    case PayoffRegime::kBalanced: return "balanced";
    case PayoffRegime::kPositiveDominated: return "positive";
    case PayoffRegime::kNegativeDominated: return "negative";
    case PayoffRegime::kNegativeDominatedPP: return "negative-pp";
  }
  return "?";
}

Alignment alignment_from_string(const std::string& s) {
  if (s == "cooperative") return Alignment::kCooperative;
  if (s == "adversarial") return Alignment::kAdversarial;
  throw ValidationError("unknown alignment: " + s);
}

PayoffRegime regime_from_string(const std::string& s) {
  if (s == "balanced") return PayoffRegime::kBalanced;
  if (s == "positive") return PayoffRegime::kPositiveDominated;
  if (s == "negative") return PayoffRegime::kNegativeDominated;
  if (s == "negative-pp") return PayoffRegime::kNegativeDominatedPP;
  throw ValidationError("unknown payoff regime: " + s);
}

int GeneratorConfig::resolved_g_min() const {
  if (g_min) return *g_min;
  switch (payoff_regime) {
    case PayoffRegime::kBalanced: return -30;
    case PayoffRegime::kPositiveDominated: return -8;
    case PayoffRegime::kNegativeDominated:
    case PayoffRegime::kNegativeDominatedPP: return -30;
  }
  return -30;
}

int GeneratorConfig::resolved_g_max() const {
  if (g_max) return *g_max;
  switch (payoff_regime) {
    case PayoffRegime::kBalanced: return 30;
    case PayoffRegime::kPositiveDominated: return 30;
    case PayoffRegime::kNegativeDominated:
    case PayoffRegime::kNegativeDominatedPP: return 8;
  }
  return 30;
}

std::string GeneratorConfig::canonical_json() const {
  nlohmann::json j;
  j["num_players"] = num_players;
  j["actions_per_player"] = actions_per_player;
  j["actions_per_player_max"] = actions_per_player_max;
  j["num_goals"] = num_goals;
  j["latent_dim"] = latent_dim;
  j["alignment"] = to_string(alignment);
  j["payoff_regime"] = to_string(payoff_regime);
  j["g_min"] = resolved_g_min();
  j["g_max"] = resolved_g_max();
  j["aon_fraction"] = aon_fraction;
  j["zipf_alpha"] = zipf_alpha;
  j["noise_sigma"] = noise_sigma;
  j["cooperative_mean"] = cooperative_mean;
  j["clip_pill_to_range"] = clip_pill_to_range;
  j["seed"] = seed;
  return j.dump();
}

std::string GeneratorConfig::config_hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_json())));
  return std::string(buf);
}

void validate_config(const GeneratorConfig& config) {
  if (config.num_players < 2) throw ValidationError("generator: num_players must be >= 2");
  if (config.num_goals < 1) throw ValidationError("generator: num_goals must be >= 1");
  if (config.actions_per_player < 1) throw ValidationError("generator: actions_per_player must be >= 1");
  if (config.actions_per_player_max != 0 &&
      config.actions_per_player_max < config.actions_per_player)
    throw ValidationError("generator: actions_per_player_max below actions_per_player");
  if (config.latent_dim < 1) throw ValidationError("generator: latent_dim must be >= 1");
  if (config.aon_fraction < 0.0 || config.aon_fraction > 1.0)
    throw ValidationError("generator: aon_fraction must lie in [0,1]");
  if (config.zipf_alpha <= 1.0) throw ValidationError("generator: zipf_alpha must exceed 1");
  if (config.noise_sigma < 0.0) throw ValidationError("generator: noise_sigma must be >= 0");
  if (config.cooperative_mean <= 0.0)
    throw ValidationError("generator: cooperative_mean must be positive");
  if (config.resolved_g_min() >= config.resolved_g_max())
    throw ValidationError("generator: g_min must be below g_max");
}

namespace {

std::vector<int> sample_action_counts(const GeneratorConfig& config, const Rng& root) {
  std::vector<int> counts(config.num_players, config.actions_per_player);
  if (config.actions_per_player_max > config.actions_per_player) {
    Rng rng = root.stream("actions");
    for (int n = 0; n < config.num_players; ++n)
      counts[n] = static_cast<int>(rng.range(config.actions_per_player,
                                             config.actions_per_player_max));
  }
  return counts;
}

std::int64_t round_half_away(double x) {
  return static_cast<std::int64_t>(x < 0 ? std::ceil(x - 0.5) : std::floor(x + 0.5));
}

}  // namespace

LatentSample sample_latents(const GeneratorConfig& config, const Rng& root) {
  const int ng = config.num_goals;
  const int np = config.num_players;
  const int d = config.latent_dim;
  LatentSample s;
  s.goal_vectors.resize(static_cast<std::size_t>(ng) * d);
  s.player_vectors.resize(static_cast<std::size_t>(np) * d);
  s.noise.assign(static_cast<std::size_t>(ng) * np, 0.0);

  Rng gv = root.stream("goal_vectors");
  for (double& x : s.goal_vectors) x = gv.next_gaussian();

  const double mean = config.alignment == Alignment::kCooperative ? config.cooperative_mean : 0.0;
  Rng pv = root.stream("player_vectors");
  for (double& x : s.player_vectors) x = mean + pv.next_gaussian();

  if (config.noise_sigma > 0.0) {
    Rng nz = root.stream("noise");
    for (double& x : s.noise) x = config.noise_sigma * nz.next_gaussian();
  }
  return s;
}

GoalUtilityMatrix sample_goal_utilities(const GeneratorConfig& config, const Rng& root) {
  validate_config(config);
  const int ng = config.num_goals;
  const int np = config.num_players;
  const int d = config.latent_dim;
  const LatentSample s = sample_latents(config, root);

  std::vector<double> raw(static_cast<std::size_t>(ng) * np);
  for (int g = 0; g < ng; ++g) {
    for (int p = 0; p < np; ++p) {
      double dot = 0.0;
      for (int i = 0; i < d; ++i)
        dot += s.goal_vectors[static_cast<std::size_t>(g) * d + i] *
               s.player_vectors[static_cast<std::size_t>(p) * d + i];
      raw[static_cast<std::size_t>(g) * np + p] = dot + s.noise[static_cast<std::size_t>(g) * np + p];
    }
  }

  const double lo = *std::min_element(raw.begin(), raw.end());
  const double hi = *std::max_element(raw.begin(), raw.end());
  const double gmin = config.resolved_g_min();
  const double gmax = config.resolved_g_max();

  GoalUtilityMatrix m;
  m.num_goals = ng;
  m.num_players = np;
  m.values.resize(raw.size());
  if (hi == lo) {
    const std::int64_t mid = round_half_away((gmin + gmax) / 2.0);
    std::fill(m.values.begin(), m.values.end(), mid);
    return m;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double scaled = gmin + (raw[i] - lo) * (gmax - gmin) / (hi - lo);
    m.values[i] = round_half_away(scaled);
  }
  return m;
}

int zeta_draw(double alpha, int max_support, Rng& rng) {
  // Inverse CDF over the truncated support; weights k^-alpha.
  double total = 0.0;
  for (int k = 1; k <= max_support; ++k) total += std::pow(k, -alpha);
  const double u = rng.next_double() * total;
  double acc = 0.0;
  for (int k = 1; k <= max_support; ++k) {
    acc += std::pow(k, -alpha);
    if (u < acc) return k;
  }
  return max_support;
}

std::vector<Goal> sample_goal_structure(const GeneratorConfig& config,
                                        const std::vector<int>& actions_per_player,
                                        const Rng& root) {
  validate_config(config);
  int total_slots = 0;
  for (int a : actions_per_player) total_slots += a;
  const int ng = config.num_goals;
  const long n_aon = std::lround(config.aon_fraction * ng);
  if (total_slots < 2 && n_aon > 0)
    throw ValidationError("generator: all-or-nothing goals need at least 2 total slots");

  std::vector<int> sizes(ng);
  Rng size_rng = root.stream("goal_sizes");
  for (int g = 0; g < ng; ++g) sizes[g] = zeta_draw(config.zipf_alpha, total_slots, size_rng);

  // Uniform choice of exactly n_aon all-or-nothing goals.
  std::vector<char> is_aon(ng, 0);
  {
    std::vector<int> idx(ng);
    for (int i = 0; i < ng; ++i) idx[i] = i;
    Rng pick = root.stream("aon_assign");
    for (long i = 0; i < n_aon; ++i) {
      const std::size_t j = i + pick.below(ng - i);
      std::swap(idx[i], idx[j]);
      is_aon[idx[i]] = 1;
    }
  }

  std::vector<Goal> goals(ng);
  Rng slot_rng = root.stream("goal_slots");
  std::vector<int> all_slots(total_slots);
  std::vector<std::pair<int, int>> slot_refs(total_slots);
  {
    int s = 0;
    for (int p = 0; p < static_cast<int>(actions_per_player.size()); ++p)
      for (int j = 0; j < actions_per_player[p]; ++j) slot_refs[s++] = {p, j};
  }
  for (int g = 0; g < ng; ++g) {
    int c = std::clamp(sizes[g], is_aon[g] ? 2 : 1, total_slots);
    for (int i = 0; i < total_slots; ++i) all_slots[i] = i;
    Goal& goal = goals[g];
    goal.id = g;
    goal.kind = is_aon[g] ? GoalKind::kAllOrNothing : GoalKind::kLinear;
    goal.required.reserve(c);
    for (int i = 0; i < c; ++i) {
      const std::size_t j = i + slot_rng.below(total_slots - i);
      std::swap(all_slots[i], all_slots[j]);
      auto [p, a] = slot_refs[all_slots[i]];
      goal.required.push_back(SlotRef{p, a});
    }
  }
  return goals;
}

Game inject_poison_pill(Game game, Rng rng, bool clip_to_range, std::optional<int> g_min,
                        std::optional<int> g_max) {
  if (game.num_players < 2)
    throw ValidationError("poison pill: game needs at least 2 players");

  // Ordered (beneficiary, victim) pairs, without replacement across
  // repeated injections.
  std::set<std::pair<int, int>> used(game.provenance.pill_pairs.begin(),
                                     game.provenance.pill_pairs.end());
  std::vector<std::pair<int, int>> candidates;
  for (int b = 0; b < game.num_players; ++b)
    for (int v = 0; v < game.num_players; ++v)
      if (b != v && !used.count({b, v})) candidates.push_back({b, v});
  if (candidates.empty())
    throw ValidationError("poison pill: every player pair already used");
  const auto [beneficiary, victim] = candidates[rng.below(candidates.size())];

  // Fresh = referenced by no goal; extend the action list when none left.
  auto fresh_actions = [&](int player, int want) {
    std::vector<char> referenced(game.actions_per_player[player], 0);
    for (const Goal& g : game.goals)
      for (const SlotRef& r : g.required)
        if (r.player == player) referenced[r.action] = 1;
    std::vector<int> out;
    for (int j = 0; j < game.actions_per_player[player] && static_cast<int>(out.size()) < want; ++j)
      if (!referenced[j]) out.push_back(j);
    while (static_cast<int>(out.size()) < want) {
      out.push_back(game.actions_per_player[player]);
      game.actions_per_player[player] += 1;
    }
    return out;
  };

  const std::vector<int> b_slots = fresh_actions(beneficiary, 1);
  const std::vector<int> v_slots = fresh_actions(victim, 2);

  auto clip = [&](std::int64_t u) -> std::int64_t {
    if (!clip_to_range) return u;
    const std::int64_t lo = g_min.value_or(-30);
    const std::int64_t hi = g_max.value_or(30);
    return std::clamp(u, lo, hi);
  };

  int next_id = 0;
  for (const Goal& g : game.goals) next_id = std::max(next_id, g.id + 1);

  Goal bait;
  bait.id = next_id;
  bait.kind = GoalKind::kAllOrNothing;
  bait.required = {SlotRef{beneficiary, b_slots[0]}, SlotRef{victim, v_slots[0]}};

  Goal poison;
  poison.id = next_id + 1;
  poison.kind = GoalKind::kLinear;
  poison.required = {SlotRef{victim, v_slots[1]}};

  const int np = game.num_players;
  GoalUtilityMatrix m;
  m.num_goals = game.utilities.num_goals + 2;
  m.num_players = np;
  m.values = game.utilities.values;
  m.values.resize(static_cast<std::size_t>(m.num_goals) * np, 0);
  m.at(m.num_goals - 2, beneficiary) = clip(30);
  m.at(m.num_goals - 2, victim) = clip(30);
  m.at(m.num_goals - 1, beneficiary) = clip(10);
  m.at(m.num_goals - 1, victim) = clip(-25);

  game.goals.push_back(std::move(bait));
  game.goals.push_back(std::move(poison));
  game.utilities = std::move(m);
  game.provenance.pill_pairs.push_back({beneficiary, victim});
  validate_game(game);
  return game;
}

Game generate_game(const GeneratorConfig& config) {
  validate_config(config);
  const Rng root(config.seed);

  Game game;
  game.num_players = config.num_players;
  game.actions_per_player = sample_action_counts(config, root);
  game.utilities = sample_goal_utilities(config, root);
  game.goals = sample_goal_structure(config, game.actions_per_player, root);
  game.provenance.kind = "generator";
  game.provenance.seed = config.seed;
  game.provenance.config_hash = config.config_hash();
  game.provenance.config_json = config.canonical_json();
  validate_game(game);

  if (config.payoff_regime == PayoffRegime::kNegativeDominatedPP)
    game = inject_poison_pill(std::move(game), root.stream("pill"), config.clip_pill_to_range,
                              config.resolved_g_min(), config.resolved_g_max());
  return game;
}

}  // namespace negobench
