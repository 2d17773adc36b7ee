#include "negobench/core.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>

#include "negobench/kernels.hpp"

namespace negobench {

void validate_game(const Game& game) {
  if (game.num_players < 2) throw ValidationError("game: num_players must be >= 2");
  if (static_cast<int>(game.actions_per_player.size()) != game.num_players)
    throw ValidationError("game: actions_per_player length != num_players");
  for (int a : game.actions_per_player)
    if (a < 0) throw ValidationError("game: negative action count");
  if (game.goals.empty()) throw ValidationError("game: at least one goal required");
  if (game.utilities.num_goals != game.num_goals() ||
      game.utilities.num_players != game.num_players ||
      game.utilities.values.size() !=
          static_cast<std::size_t>(game.num_goals()) * game.num_players)
    throw ValidationError("game: utility matrix shape mismatch");
  if (game.payoff_denom < 1) throw ValidationError("game: payoff_denom must be positive");
  for (const Goal& g : game.goals) {
    if (g.required.empty()) throw ValidationError("goal " + std::to_string(g.id) + ": empty required set");
    if (g.kind == GoalKind::kAllOrNothing && g.required.size() < 2)
      throw ValidationError("goal " + std::to_string(g.id) +
                            ": all-or-nothing goals need >= 2 required commitments");
    std::vector<SlotRef> seen = g.required;
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw ValidationError("goal " + std::to_string(g.id) + ": duplicate required slot");
    for (const SlotRef& r : g.required) {
      if (r.player < 0 || r.player >= game.num_players)
        throw ValidationError("goal " + std::to_string(g.id) + ": player index out of range");
      if (r.action < 0 || r.action >= game.actions_per_player[r.player])
        throw ValidationError("goal " + std::to_string(g.id) + ": action index out of range");
    }
  }
}

GameContext::GameContext(Game game) : game_(std::move(game)) {
  validate_game(game_);
  const int np = game_.num_players;
  const int ng = game_.num_goals();

  offsets_.resize(np);
  int slot = 0;
  for (int n = 0; n < np; ++n) {
    offsets_[n] = slot;
    slot += game_.actions_per_player[n];
  }
  total_slots_ = slot;
  words_ = kernels::padded_words(total_slots_);
  slot_refs_.resize(total_slots_);
  for (int n = 0; n < np; ++n)
    for (int j = 0; j < game_.actions_per_player[n]; ++j)
      slot_refs_[offsets_[n] + j] = SlotRef{n, j};

  goal_masks_.assign(static_cast<std::size_t>(ng) * words_, 0);
  required_counts_.resize(ng);
  goal_kind_.resize(ng);
  slot_goals_.resize(total_slots_);
  contributors_.resize(ng);
  contributor_masks_.resize(ng);
  for (int g = 0; g < ng; ++g) {
    const Goal& goal = game_.goals[g];
    goal_kind_[g] = goal.kind;
    required_counts_[g] = static_cast<std::int32_t>(goal.required.size());
    std::uint64_t* mask = goal_masks_.data() + static_cast<std::size_t>(g) * words_;
    std::vector<std::pair<int, std::vector<std::uint64_t>>> per_player;
    for (const SlotRef& r : goal.required) {
      int s = slot_of(r.player, r.action);
      mask[s >> 6] |= std::uint64_t{1} << (s & 63);
      slot_goals_[s].push_back(g);
      auto it = std::find_if(per_player.begin(), per_player.end(),
                             [&](const auto& p) { return p.first == r.player; });
      if (it == per_player.end()) {
        per_player.push_back({r.player, std::vector<std::uint64_t>(words_, 0)});
        it = per_player.end() - 1;
      }
      it->second[s >> 6] |= std::uint64_t{1} << (s & 63);
    }
    std::sort(per_player.begin(), per_player.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [player, pmask] : per_player) {
      std::int32_t cnt = 0;
      for (std::uint64_t w : pmask) cnt += std::popcount(w);
      contributors_[g].push_back(Contributor{player, cnt});
      contributor_masks_[g].push_back(std::move(pmask));
    }
  }

  // Common denominator for linear-goal satisfactions.
  scaled_ok_ = true;
  __int128 l = 1;
  for (int g = 0; g < ng; ++g) {
    if (goal_kind_[g] != GoalKind::kLinear) continue;
    const std::int64_t d = required_counts_[g];
    // gcd(l, d) == gcd(l mod d, d); l mod d fits in int64.
    const std::int64_t rem = static_cast<std::int64_t>(l % d);
    const std::int64_t gc = rem == 0 ? d : std::gcd(rem, d);
    l *= d / gc;
    if (l > (__int128)1 << 62) {
      scaled_ok_ = false;
      break;
    }
  }
  if (scaled_ok_) {
    scale_ = static_cast<std::int64_t>(l);
    sat_step_.resize(ng, 0);
    for (int g = 0; g < ng; ++g)
      if (goal_kind_[g] == GoalKind::kLinear) sat_step_[g] = scale_ / required_counts_[g];
    __int128 worst = 0;
    for (int n = 0; n < np; ++n) {
      __int128 b = 0;
      for (int g = 0; g < ng; ++g) {
        std::int64_t u = game_.utilities.at(g, n);
        b += (__int128)(u < 0 ? -u : u) * scale_;
      }
      worst = std::max(worst, b);
    }
    if (worst > (__int128)1 << 61) scaled_ok_ = false;
  }
  if (!scaled_ok_) {
    scale_ = 1;
    sat_step_.assign(ng, 0);
  }

  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (std::int64_t v : game_.utilities.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  payoff_span_ = static_cast<double>(hi - lo) / static_cast<double>(game_.payoff_denom) * ng;
  if (payoff_span_ <= 0) payoff_span_ = 1.0;
}

CommitmentState GameContext::empty_state() const {
  CommitmentState s;
  s.words.assign(words_, 0);
  s.turn = 0;
  return s;
}

bool GameContext::all_set(const CommitmentState& s) const {
  for (int i = 0; i < total_slots_; ++i)
    if (!is_set(s, i)) return false;
  return true;
}

CommitmentState GameContext::with_slots(const CommitmentState& s, std::span<const int> slots,
                                        int new_turn) const {
  CommitmentState out = s;
  for (int sl : slots) out.words[sl >> 6] |= std::uint64_t{1} << (sl & 63);
  out.turn = new_turn;
  return out;
}

std::vector<int> GameContext::free_actions(const CommitmentState& s, int player) const {
  std::vector<int> out;
  const int base = offsets_[player];
  for (int j = 0; j < game_.actions_per_player[player]; ++j)
    if (!is_set(s, base + j)) out.push_back(j);
  return out;
}

int GameContext::free_action_count(const CommitmentState& s, int player) const {
  const int base = offsets_[player];
  int c = 0;
  for (int j = 0; j < game_.actions_per_player[player]; ++j)
    if (!is_set(s, base + j)) ++c;
  return c;
}

void GameContext::satisfaction_counts(const CommitmentState& s, std::int32_t* out) const {
  kernels::satisfaction_kernel()(s.words.data(), goal_masks_.data(), words_, num_goals(), out);
}

std::int32_t GameContext::goal_count(const CommitmentState& s, int goal) const {
  const std::uint64_t* m = goal_masks_.data() + static_cast<std::size_t>(goal) * words_;
  std::int32_t c = 0;
  for (int w = 0; w < words_; ++w) c += std::popcount(s.words[w] & m[w]);
  return c;
}

std::int32_t GameContext::player_goal_count(const CommitmentState& s, int goal, int player) const {
  const auto& contribs = contributors_[goal];
  for (std::size_t i = 0; i < contribs.size(); ++i) {
    if (contribs[i].player != player) continue;
    const auto& mask = contributor_masks_[goal][i];
    std::int32_t c = 0;
    for (int w = 0; w < words_; ++w) c += std::popcount(s.words[w] & mask[w]);
    return c;
  }
  return 0;
}

void GameContext::require_scaled(const char* who) const {
  if (!scaled_ok_)
    throw TractabilityError(std::string(who) +
                            ": game exceeds the integer payoff-scale bound "
                            "(satisfaction denominators too large)");
}

void GameContext::set_exclusions(std::vector<std::vector<int>> exclusion_slots) {
  for (const auto& set : exclusion_slots) {
    if (set.size() < 2) throw ValidationError("exclusion set with fewer than 2 members");
    for (int s : set)
      if (s < 0 || s >= total_slots_) throw ValidationError("exclusion slot out of range");
  }
  exclusions_ = std::move(exclusion_slots);
}

bool GameContext::violates_exclusions(const CommitmentState& s) const {
  for (const auto& set : exclusions_) {
    bool all = true;
    for (int slot : set)
      if (!is_set(s, slot)) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

Rational goal_satisfaction(const GameContext& ctx, const Goal& goal,
                           const CommitmentState& state) {
  if (static_cast<int>(state.words.size()) != ctx.words())
    throw ValidationError("goal_satisfaction: state/game dimension mismatch");
  std::int64_t committed = 0;
  for (const SlotRef& r : goal.required) {
    if (r.player < 0 || r.player >= ctx.num_players() || r.action < 0 ||
        r.action >= ctx.game().actions_per_player[r.player])
      throw ValidationError("goal_satisfaction: required slot out of range");
    if (ctx.is_set(state, ctx.slot_of(r.player, r.action))) ++committed;
  }
  const auto total = static_cast<std::int64_t>(goal.required.size());
  if (goal.kind == GoalKind::kAllOrNothing) return committed == total ? Rational(1) : Rational(0);
  return Rational(committed, total);
}

std::vector<Rational> satisfaction_vector(const GameContext& ctx, const CommitmentState& state) {
  if (static_cast<int>(state.words.size()) != ctx.words())
    throw ValidationError("satisfaction_vector: state/game dimension mismatch");
  std::vector<std::int32_t> counts(ctx.num_goals());
  ctx.satisfaction_counts(state, counts.data());
  std::vector<Rational> out(ctx.num_goals());
  for (int g = 0; g < ctx.num_goals(); ++g) {
    if (ctx.goal_kind(g) == GoalKind::kAllOrNothing)
      out[g] = counts[g] == ctx.required_count(g) ? Rational(1) : Rational(0);
    else
      out[g] = Rational(counts[g], ctx.required_count(g));
  }
  return out;
}

PayoffVector reward_vector(const GameContext& ctx, const CommitmentState& state) {
  std::vector<Rational> sat = satisfaction_vector(ctx, state);
  PayoffVector r(ctx.num_players(), Rational(0));
  const Rational denom(ctx.game().payoff_denom);
  for (int n = 0; n < ctx.num_players(); ++n) {
    Rational acc(0);
    for (int g = 0; g < ctx.num_goals(); ++g) {
      std::int64_t u = ctx.game().utilities.at(g, n);
      if (u != 0 && !sat[g].is_zero()) acc += Rational(u) * sat[g];
    }
    r[n] = acc / denom;
  }
  return r;
}

void reward_scaled(const GameContext& ctx, const std::int32_t* counts, std::int64_t* out) {
  const int np = ctx.num_players();
  const int ng = ctx.num_goals();
  std::vector<std::int64_t> sat(ng);
  for (int g = 0; g < ng; ++g) sat[g] = ctx.sat_scaled(g, counts[g]);
  for (int n = 0; n < np; ++n) {
    std::int64_t acc = 0;
    for (int g = 0; g < ng; ++g) {
      std::int64_t u = ctx.game().utilities.at(g, n);
      if (u != 0) acc += u * sat[g];
    }
    out[n] = acc;
  }
}

}  // namespace negobench
