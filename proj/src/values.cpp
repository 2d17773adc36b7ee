#include "negobench/values.hpp"

#include "negobench/solvers.hpp"

namespace negobench {

std::string to_string(ValueKind k) {
  switch (k) {
    case ValueKind::kReward: return "reward";
    case ValueKind::kUpper: return "upper";
    case ValueKind::kLower: return "lower";
    case ValueKind::kExact: return "exact";
  }
  return "?";
}

ValueKind value_kind_from_string(const std::string& s) {
  if (s == "reward") return ValueKind::kReward;
  if (s == "upper") return ValueKind::kUpper;
  if (s == "lower") return ValueKind::kLower;
  if (s == "exact") return ValueKind::kExact;
  throw ValidationError("unknown value approximation: " + s);
}

void validate_approximation(const ValueApproximation& approx, int num_players) {
  if (approx.kind == ValueKind::kExact && approx.exact == nullptr)
    throw ValidationError("value approximation: exact kind without a solver session");
  if (approx.per_player_kinds.empty()) return;
  if (static_cast<int>(approx.per_player_kinds.size()) != num_players)
    throw ValidationError("value approximation: per-player override length != num_players");
  if (approx.kind == ValueKind::kExact)
    throw ValidationError("value approximation: per-player overrides cannot mix with exact");
  for (ValueKind k : approx.per_player_kinds)
    if (k == ValueKind::kExact)
      throw ValidationError("value approximation: per-player overrides cannot be exact");
}

PayoffVector value_reward(const GameContext& ctx, const CommitmentState& state) {
  return reward_vector(ctx, state);
}

Rational value_upper(const GameContext& ctx, const CommitmentState& state, int player) {
  const std::vector<Rational> sat = satisfaction_vector(ctx, state);
  Rational acc(0);
  for (int g = 0; g < ctx.num_goals(); ++g) {
    const std::int64_t u = ctx.game().utilities.at(g, player);
    if (u > 0)
      acc += Rational(u);
    else if (u < 0)
      acc += sat[g] * Rational(u);
  }
  return acc / Rational(ctx.game().payoff_denom);
}

GoalPending goal_pending(const GameContext& ctx, const CommitmentState& state, int goal) {
  GoalPending out;
  for (const GameContext::Contributor& c : ctx.contributors(goal)) {
    if (ctx.player_goal_count(state, goal, c.player) >= c.required) continue;
    out.pending_count += 1;
    out.pending_single = out.pending_count == 1 ? c.player : -1;
    if (ctx.game().utilities.at(goal, c.player) < 0) {
      out.neg_pending_count += 1;
      out.neg_pending_single = out.neg_pending_count == 1 ? c.player : -1;
    }
  }
  return out;
}

std::vector<int> credible_threats(const GameContext& ctx, const CommitmentState& state,
                                  int player, const ValueOptions& opts) {
  std::vector<int> out;
  for (int g = 0; g < ctx.num_goals(); ++g) {
    const GoalPending p = goal_pending(ctx, state, g);
    if (credible_for(p, ctx.game().utilities.at(g, player), player, opts)) out.push_back(g);
  }
  return out;
}

Rational value_lower(const GameContext& ctx, const CommitmentState& state, int player,
                     const ValueOptions& opts) {
  const std::vector<Rational> sat = satisfaction_vector(ctx, state);
  Rational acc(0);
  for (int g = 0; g < ctx.num_goals(); ++g) {
    const std::int64_t u = ctx.game().utilities.at(g, player);
    if (u == 0) continue;
    acc += sat[g] * Rational(u);
  }
  for (int g : credible_threats(ctx, state, player, opts)) {
    const std::int64_t u = ctx.game().utilities.at(g, player);
    acc += (Rational(1) - sat[g]) * Rational(u);
  }
  return acc / Rational(ctx.game().payoff_denom);
}

PayoffVector evaluate(const ValueApproximation& approx, const GameContext& ctx,
                      const CommitmentState& state) {
  validate_approximation(approx, ctx.num_players());
  if (approx.heterogeneous()) {
    const PayoffVector r = reward_vector(ctx, state);
    PayoffVector v(ctx.num_players());
    for (int n = 0; n < ctx.num_players(); ++n) {
      switch (approx.kind_for(n)) {
        case ValueKind::kReward: v[n] = r[n]; break;
        case ValueKind::kUpper: v[n] = value_upper(ctx, state, n); break;
        case ValueKind::kLower: v[n] = value_lower(ctx, state, n, approx.options); break;
        case ValueKind::kExact: break;  // excluded by validation
      }
    }
    return v;
  }
  switch (approx.kind) {
    case ValueKind::kReward:
      return reward_vector(ctx, state);
    case ValueKind::kUpper: {
      PayoffVector v(ctx.num_players());
      for (int n = 0; n < ctx.num_players(); ++n) v[n] = value_upper(ctx, state, n);
      return v;
    }
    case ValueKind::kLower: {
      PayoffVector v(ctx.num_players());
      for (int n = 0; n < ctx.num_players(); ++n)
        v[n] = value_lower(ctx, state, n, approx.options);
      return v;
    }
    case ValueKind::kExact: {
      if (approx.exact == nullptr)
        throw ValidationError("evaluate: exact approximation without a solver session");
      return approx.exact->exact_value(state);
    }
  }
  throw ValidationError("evaluate: bad value kind");
}

void evaluate_scaled(const GameContext& ctx, ValueKind kind, const ValueOptions& opts,
                     const CommitmentState& state, std::int64_t* out) {
  ctx.require_scaled("evaluate_scaled");
  const int np = ctx.num_players();
  const int ng = ctx.num_goals();
  std::vector<std::int32_t> counts(ng);
  ctx.satisfaction_counts(state, counts.data());
  std::vector<std::int64_t> sat(ng);
  for (int g = 0; g < ng; ++g) sat[g] = ctx.sat_scaled(g, counts[g]);
  const std::int64_t scale = ctx.scale();

  switch (kind) {
    case ValueKind::kReward: {
      for (int n = 0; n < np; ++n) {
        std::int64_t acc = 0;
        for (int g = 0; g < ng; ++g) acc += ctx.game().utilities.at(g, n) * sat[g];
        out[n] = acc;
      }
      return;
    }
    case ValueKind::kUpper: {
      for (int n = 0; n < np; ++n) {
        std::int64_t acc = 0;
        for (int g = 0; g < ng; ++g) {
          const std::int64_t u = ctx.game().utilities.at(g, n);
          if (u > 0)
            acc += u * scale;
          else if (u < 0)
            acc += u * sat[g];
        }
        out[n] = acc;
      }
      return;
    }
    case ValueKind::kLower: {
      std::vector<GoalPending> pending(ng);
      for (int g = 0; g < ng; ++g) pending[g] = goal_pending(ctx, state, g);
      for (int n = 0; n < np; ++n) {
        std::int64_t acc = 0;
        for (int g = 0; g < ng; ++g) {
          const std::int64_t u = ctx.game().utilities.at(g, n);
          if (u == 0) continue;
          acc += u * sat[g];
          if (credible_for(pending[g], u, n, opts)) acc += u * (scale - sat[g]);
        }
        out[n] = acc;
      }
      return;
    }
    case ValueKind::kExact:
      throw ValidationError("evaluate_scaled: exact values go through the solver session");
  }
}

std::int64_t evaluate_scaled_for(const GameContext& ctx, ValueKind kind,
                                 const ValueOptions& opts, const CommitmentState& state,
                                 int player) {
  ctx.require_scaled("evaluate_scaled_for");
  const int ng = ctx.num_goals();
  std::vector<std::int32_t> counts(ng);
  ctx.satisfaction_counts(state, counts.data());
  const std::int64_t scale = ctx.scale();
  std::int64_t acc = 0;
  switch (kind) {
    case ValueKind::kReward: {
      for (int g = 0; g < ng; ++g)
        acc += ctx.game().utilities.at(g, player) * ctx.sat_scaled(g, counts[g]);
      return acc;
    }
    case ValueKind::kUpper: {
      for (int g = 0; g < ng; ++g) {
        const std::int64_t u = ctx.game().utilities.at(g, player);
        if (u > 0)
          acc += u * scale;
        else if (u < 0)
          acc += u * ctx.sat_scaled(g, counts[g]);
      }
      return acc;
    }
    case ValueKind::kLower: {
      for (int g = 0; g < ng; ++g) {
        const std::int64_t u = ctx.game().utilities.at(g, player);
        if (u == 0) continue;
        const std::int64_t s = ctx.sat_scaled(g, counts[g]);
        acc += u * s;
        if (u < 0 && credible_for(goal_pending(ctx, state, g), u, player, opts))
          acc += u * (scale - s);
      }
      return acc;
    }
    case ValueKind::kExact:
      throw ValidationError("evaluate_scaled_for: exact values go through the solver session");
  }
  return acc;
}

}  // namespace negobench
