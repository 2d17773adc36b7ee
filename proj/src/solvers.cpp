#include "negobench/solvers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "negobench/rng.hpp"

namespace negobench {

namespace {

constexpr std::uint32_t kNoIndex = 0xffffffffu;

}  // namespace

SolverSession::SolverSession(const GameContext& ctx, int horizon, int k, SolverLimits limits)
    : ctx_(ctx), horizon_(horizon), k_(k), limits_(limits), np_(ctx.num_players()),
      total_slots_(ctx.total_slots()) {
  ctx_.require_scaled("exact solver");
  if (horizon_ < 0) throw ValidationError("exact solver: negative horizon");
  if (k_ < 1) throw ValidationError("exact solver: k must be >= 1");
  if (total_slots_ > 56)
    throw TractabilityError("exact solver: games above 56 total slots are out of reach");
  if (total_slots_ + std::bit_width(static_cast<unsigned>(horizon_) + 1u) > 64)
    throw TractabilityError("exact solver: horizon too long for the state key");
  std::size_t cap = 1 << 16;
  keys_.assign(cap, 0);
  index_.assign(cap, kNoIndex);
  capacity_mask_ = cap - 1;
}

CommitmentState SolverSession::materialize(std::uint64_t bits, int turn) const {
  CommitmentState s = ctx_.empty_state();
  s.words[0] = bits;
  s.turn = turn;
  return s;
}

std::uint32_t SolverSession::insert(std::uint64_t key) {
  if (size_ + 1 > (capacity_mask_ + 1) / 2) {
    // grow
    std::vector<std::uint64_t> old_keys = std::move(keys_);
    std::vector<std::uint32_t> old_index = std::move(index_);
    const std::size_t new_cap = (capacity_mask_ + 1) * 2;
    keys_.assign(new_cap, 0);
    index_.assign(new_cap, kNoIndex);
    capacity_mask_ = new_cap - 1;
    for (std::size_t i = 0; i < old_keys.size(); ++i) {
      if (old_keys[i] == 0) continue;
      std::size_t h = mix64(old_keys[i]) & capacity_mask_;
      while (keys_[h] != 0) h = (h + 1) & capacity_mask_;
      keys_[h] = old_keys[i];
      index_[h] = old_index[i];
    }
  }
  if (size_ >= limits_.max_states)
    throw TractabilityError("exact solver: state limit exceeded (" +
                            std::to_string(limits_.max_states) + " nodes)");
  std::size_t h = mix64(key + 1) & capacity_mask_;
  while (keys_[h] != 0) h = (h + 1) & capacity_mask_;
  keys_[h] = key + 1;
  const auto idx = static_cast<std::uint32_t>(size_++);
  index_[h] = idx;
  arena_.resize(arena_.size() + np_, 0);
  return idx;
}

std::uint32_t SolverSession::solve(std::uint64_t bits, int turn) {
  const std::uint64_t key = state_key(bits, turn);
  {
    std::size_t h = mix64(key + 1) & capacity_mask_;
    while (keys_[h] != 0) {
      if (keys_[h] == key + 1) return index_[h];
      h = (h + 1) & capacity_mask_;
    }
  }

  if (turn >= horizon_) {
    const CommitmentState s = materialize(bits, turn);
    std::vector<std::int32_t> counts(ctx_.num_goals());
    ctx_.satisfaction_counts(s, counts.data());
    std::vector<std::int64_t> r(np_);
    reward_scaled(ctx_, counts.data(), r.data());
    const std::uint32_t idx = insert(key);
    std::memcpy(value_at(idx), r.data(), sizeof(std::int64_t) * np_);
    return idx;
  }

  const int proposer = turn % np_;
  std::vector<std::int64_t> v_rej(np_);
  {
    const std::uint32_t rej = solve(bits, turn + 1);
    std::memcpy(v_rej.data(), value_at(rej), sizeof(std::int64_t) * np_);
  }
  std::vector<std::int64_t> v_star = v_rej;
  std::vector<std::int64_t> v_best(np_);
  std::vector<std::int64_t> v_new(np_);

  const CommitmentState s = materialize(bits, turn);
  for (int partner = 0; partner < np_; ++partner) {
    if (partner == proposer) continue;
    if (count_joint_updates(ctx_.free_action_count(s, proposer),
                            ctx_.free_action_count(s, partner), k_) >
        limits_.max_actions_per_node)
      throw TractabilityError("exact solver: joint-action budget exceeded at a node");
    v_best = v_rej;
    for_each_feasible_update(
        ctx_, s, proposer, partner, k_,
        [&](const std::vector<int>& a, const std::vector<int>& b) {
          std::uint64_t child = bits;
          for (int j : a) child |= std::uint64_t{1} << ctx_.slot_of(proposer, j);
          for (int j : b) child |= std::uint64_t{1} << ctx_.slot_of(partner, j);
          const std::uint32_t ci = solve(child, turn + 1);
          std::memcpy(v_new.data(), value_at(ci), sizeof(std::int64_t) * np_);
          if (v_new[partner] >= v_rej[partner] && v_new[proposer] > v_best[proposer])
            v_best = v_new;
        });
    if (v_best[proposer] > v_star[proposer]) v_star = v_best;
  }

  const std::uint32_t idx = insert(key);
  std::memcpy(value_at(idx), v_star.data(), sizeof(std::int64_t) * np_);
  return idx;
}

void SolverSession::exact_value_scaled(const CommitmentState& state, std::int64_t* out) {
  const std::uint32_t idx = solve(state.words[0], state.turn);
  std::memcpy(out, value_at(idx), sizeof(std::int64_t) * np_);
}

PayoffVector SolverSession::exact_value(const CommitmentState& state) {
  std::vector<std::int64_t> v(np_);
  exact_value_scaled(state, v.data());
  PayoffVector out(np_);
  const std::int64_t denom = ctx_.game().payoff_denom * ctx_.scale();
  for (int n = 0; n < np_; ++n) out[n] = Rational(v[n], denom);
  return out;
}

SolverSession::Decision SolverSession::best_decision(const CommitmentState& state) {
  Decision decision;
  if (state.turn >= horizon_) return decision;
  const int proposer = state.turn % np_;
  const std::uint64_t bits = state.words[0];

  std::vector<std::int64_t> v_rej(np_);
  {
    const std::uint32_t rej = solve(bits, state.turn + 1);
    std::memcpy(v_rej.data(), value_at(rej), sizeof(std::int64_t) * np_);
  }
  std::vector<std::int64_t> v_star = v_rej;
  std::vector<std::int64_t> v_best(np_);
  std::vector<std::int64_t> v_new(np_);

  for (int partner = 0; partner < np_; ++partner) {
    if (partner == proposer) continue;
    v_best = v_rej;
    JointUpdate best_update;
    bool have_update = false;
    for_each_feasible_update(
        ctx_, state, proposer, partner, k_,
        [&](const std::vector<int>& a, const std::vector<int>& b) {
          std::uint64_t child = bits;
          for (int j : a) child |= std::uint64_t{1} << ctx_.slot_of(proposer, j);
          for (int j : b) child |= std::uint64_t{1} << ctx_.slot_of(partner, j);
          const std::uint32_t ci = solve(child, state.turn + 1);
          std::memcpy(v_new.data(), value_at(ci), sizeof(std::int64_t) * np_);
          if (v_new[partner] >= v_rej[partner] && v_new[proposer] > v_best[proposer]) {
            v_best = v_new;
            best_update = JointUpdate{a, b};
            have_update = true;
          }
        });
    if (have_update && v_best[proposer] > v_star[proposer]) {
      v_star = v_best;
      decision.partner = partner;
      decision.offer = best_update;
    }
  }
  return decision;
}

PayoffVector exact_value(const GameContext& ctx, const CommitmentState& state, int horizon, int k,
                         SolverLimits limits) {
  SolverSession session(ctx, horizon, k, limits);
  return session.exact_value(state);
}

PayoffVector optimal_payoffs(const GameContext& ctx, int horizon, int k, SolverLimits limits) {
  SolverSession session(ctx, horizon, k, limits);
  return session.exact_value(ctx.empty_state());
}

// ---------------------------------------------------------------------------
// Welfare optimization
// ---------------------------------------------------------------------------

namespace {

struct WelfareSearch {
  const GameContext& ctx;
  WelfareObjective objective;
  __int128 delta_threshold_num = 0;  // y scaled >= ceil(delta * denom * scale)
  int slots = 0;
  int np = 0;
  int ng = 0;
  std::int64_t scale = 1;

  WelfareSearch(const GameContext& c, WelfareObjective o)
      : ctx(c), objective(o), slots(c.total_slots()), np(c.num_players()), ng(c.num_goals()),
        scale(c.scale()) {
    committed.assign(ng, 0);
    decided.assign(ng, 0);
    assign.assign(slots, 2);
  }

  // per-goal running telemetry over decided slots
  std::vector<std::int32_t> committed;  // decided-1 slots in required set
  std::vector<std::int32_t> decided;    // decided slots in required set
  std::vector<char> assign;             // current partial assignment
  // incumbent
  bool have_incumbent = false;
  std::vector<char> best_assign;
  __int128 best_util = 0;
  double best_log = 0.0;

  std::int64_t sat_min(int g) const {
    if (ctx.goal_kind(g) == GoalKind::kAllOrNothing)
      return committed[g] == ctx.required_count(g) ? scale : 0;
    return ctx.sat_scaled(g, committed[g]);
  }
  std::int64_t sat_max(int g) const {
    const std::int32_t req = ctx.required_count(g);
    const std::int32_t undecided = req - decided[g];
    if (ctx.goal_kind(g) == GoalKind::kAllOrNothing) {
      // completable iff no required slot was decided 0
      return committed[g] + undecided == req ? scale : 0;
    }
    return ctx.sat_scaled(g, committed[g] + undecided);
  }

  __int128 util_bound() const {
    __int128 b = 0;
    for (int g = 0; g < ng; ++g) {
      std::int64_t w = 0;
      for (int n = 0; n < np; ++n) w += ctx.game().utilities.at(g, n);
      b += (__int128)w * (w > 0 ? sat_max(g) : sat_min(g));
    }
    return b;
  }

  // optimistic scaled payoff for one player
  __int128 player_bound(int n) const {
    __int128 b = 0;
    for (int g = 0; g < ng; ++g) {
      const std::int64_t u = ctx.game().utilities.at(g, n);
      if (u == 0) continue;
      b += (__int128)u * (u > 0 ? sat_max(g) : sat_min(g));
    }
    return b;
  }

  bool exclusion_violated_now() const {
    // a set counts only when every member is decided 1
    for (const auto& set : ctx.exclusions()) {
      bool all = true;
      for (int s : set)
        if (!(assign[s] == 1)) {
          all = false;
          break;
        }
      if (all) return true;
    }
    return false;
  }

  bool exclusion_still_avoidable() const { return !exclusion_violated_now(); }

  void decide(int slot, char v) {
    assign[slot] = v;
    for (int g : ctx.goals_touching(slot)) {
      decided[g] += 1;
      if (v == 1) committed[g] += 1;
    }
  }
  void undo(int slot, char v) {
    assign[slot] = 2;
    for (int g : ctx.goals_touching(slot)) {
      decided[g] -= 1;
      if (v == 1) committed[g] -= 1;
    }
  }

  void leaf() {
    if (exclusion_violated_now()) return;
    std::vector<std::int64_t> payoff(np);
    for (int n = 0; n < np; ++n) {
      std::int64_t acc = 0;
      for (int g = 0; g < ng; ++g) acc += ctx.game().utilities.at(g, n) * sat_min(g);
      payoff[n] = acc;
    }
    if (objective == WelfareObjective::kUtilitarian) {
      __int128 total = 0;
      for (std::int64_t v : payoff) total += v;
      if (!have_incumbent || total > best_util) {
        have_incumbent = true;
        best_util = total;
        best_assign = assign;
      }
      return;
    }
    // Nash
    double log_sum = 0.0;
    __int128 total = 0;
    for (std::int64_t v : payoff) {
      if ((__int128)v < delta_threshold_num) return;  // infeasible leaf
      log_sum += std::log(static_cast<double>(v));
      total += v;
    }
    const bool better =
        !have_incumbent || log_sum > best_log ||
        (log_sum == best_log && total > best_util);
    if (better) {
      have_incumbent = true;
      best_log = log_sum;
      best_util = total;
      best_assign = assign;
    }
  }

  void dfs(int slot) {
    if (slot == slots) {
      leaf();
      return;
    }
    if (!exclusion_still_avoidable()) return;
    if (objective == WelfareObjective::kUtilitarian) {
      if (have_incumbent && util_bound() <= best_util) return;
    } else {
      double log_bound = 0.0;
      for (int n = 0; n < np; ++n) {
        const __int128 opt = player_bound(n);
        if (opt < delta_threshold_num) return;  // some player cannot reach delta
        log_bound += std::log(static_cast<double>((std::int64_t)opt));
      }
      if (have_incumbent && log_bound < best_log - 1e-9) return;
    }
    for (char v : {char(0), char(1)}) {
      decide(slot, v);
      dfs(slot + 1);
      undo(slot, v);
    }
  }
};

}  // namespace

WelfareSolution solve_welfare(const GameContext& ctx, WelfareObjective objective,
                              const Rational& delta) {
  ctx.require_scaled("solve_welfare");
  if (objective == WelfareObjective::kNash && !(delta > Rational(0)))
    throw ValidationError("solve_welfare: Nash delta must be positive");

  WelfareSearch search(ctx, objective);
  // y_scaled >= delta * denom * scale  <=>  y_scaled >= ceil(that)
  {
    const __int128 num = (__int128)delta.num() * ctx.game().payoff_denom * ctx.scale();
    const __int128 den = delta.den();
    search.delta_threshold_num = (num + den - 1) / den;  // delta > 0
  }
  search.dfs(0);

  WelfareSolution out;
  out.objective = objective;
  if (!search.have_incumbent) {
    out.certificate = WelfareCertificate::kInfeasible;
    return out;
  }
  out.certificate = WelfareCertificate::kProvedOptimal;
  out.assignment = search.best_assign;

  CommitmentState s = ctx.empty_state();
  std::vector<int> set_slots;
  for (int i = 0; i < search.slots; ++i)
    if (search.best_assign[i]) set_slots.push_back(i);
  s = ctx.with_slots(s, set_slots, 0);
  out.satisfaction = satisfaction_vector(ctx, s);
  out.payoffs = reward_vector(ctx, s);
  out.utilitarian_sum = Rational(0);
  for (const Rational& v : out.payoffs) out.utilitarian_sum += v;
  if (objective == WelfareObjective::kNash) {
    double log_sum = 0.0;
    const double shift = std::log(static_cast<double>(ctx.game().payoff_denom) *
                                  static_cast<double>(ctx.scale()));
    log_sum = search.best_log - search.np * shift;
    out.nash_log_sum = log_sum;
  }
  return out;
}

}  // namespace negobench
