#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "negobench/core.hpp"
#include "negobench/rng.hpp"

namespace negobench {

enum class Alignment { kCooperative, kAdversarial };

enum class PayoffRegime {
  kBalanced,             // utilities in [-30, 30]
  kPositiveDominated,    // [-8, 30]
  kNegativeDominated,    // [-30, 8]
  kNegativeDominatedPP,  // [-30, 8] plus an injected poison pill
};

std::string to_string(Alignment a);
std::string to_string(PayoffRegime r);
Alignment alignment_from_string(const std::string& s);
PayoffRegime regime_from_string(const std::string& s);

struct GeneratorConfig {
  int num_players = 10;
  int actions_per_player = 2;
  // When > actions_per_player, each player's count is drawn uniformly in
  // [actions_per_player, actions_per_player_max]. 0 means uniform counts.
  int actions_per_player_max = 0;
  int num_goals = 15;
  int latent_dim = 5;
  Alignment alignment = Alignment::kAdversarial;
  PayoffRegime payoff_regime = PayoffRegime::kBalanced;
  std::optional<int> g_min;  // override the regime range
  std::optional<int> g_max;
  double aon_fraction = 0.0;
  double zipf_alpha = 1.6;
  double noise_sigma = 0.5;
  double cooperative_mean = 1.0;
  // The pill template values exceed the negative-dominated range on
  // purpose; clipping them neutralizes the trap.
  bool clip_pill_to_range = false;
  std::uint64_t seed = 0;

  int resolved_g_min() const;
  int resolved_g_max() const;
  std::string canonical_json() const;
  std::string config_hash() const;
};

void validate_config(const GeneratorConfig& config);

struct LatentSample {
  std::vector<double> goal_vectors;    // num_goals x d
  std::vector<double> player_vectors;  // num_players x d
  std::vector<double> noise;           // num_goals x num_players
};

LatentSample sample_latents(const GeneratorConfig& config, const Rng& root);

// G_{g,p} = v_g . u_p + eps, min-max rescaled to the target integer range
// and rounded half away from zero. Degenerate raw matrices (max == min)
// collapse to round((g_min+g_max)/2).
GoalUtilityMatrix sample_goal_utilities(const GeneratorConfig& config, const Rng& root);

// c_g ~ Zeta(alpha) by inverse CDF on support [1, total_slots], clamped to
// >= 2 for all-or-nothing goals; exactly lround(aon_fraction * num_goals)
// goals are all-or-nothing, chosen uniformly; required slots drawn
// uniformly without replacement.
std::vector<Goal> sample_goal_structure(const GeneratorConfig& config,
                                        const std::vector<int>& actions_per_player,
                                        const Rng& root);

// Single Zeta(alpha) draw on truncated support [1, max_support]; exposed
// for the distribution tests.
int zeta_draw(double alpha, int max_support, Rng& rng);

// Appends the bilateral bait/poison goal pair for a uniformly chosen
// (beneficiary, victim) pair not already used by an earlier injection.
// Fresh (goal-unreferenced) action slots are used where available,
// otherwise the players' action counts grow.
Game inject_poison_pill(Game game, Rng rng, bool clip_to_range = false,
                        std::optional<int> g_min = std::nullopt,
                        std::optional<int> g_max = std::nullopt);

// Deterministic function of (config, seed).
Game generate_game(const GeneratorConfig& config);

}  // namespace negobench
