#include "negobench/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>

namespace negobench {

void validate_protocol_config(const ProtocolConfig& config) {
  if (config.proposer_rounds_per_player < 0)
    throw ValidationError("protocol: proposer_rounds_per_player must be >= 0");
  if (config.k < 1) throw ValidationError("protocol: k must be >= 1");
  if (config.mcts_simulations < 1) throw ValidationError("protocol: mcts_simulations must be >= 1");
  if (config.mcts_exploration < 0) throw ValidationError("protocol: negative exploration constant");
}

namespace {

// Delta-evaluated scaled scoring for one (state, proposer, partner) offer
// search. Only goals touched by a candidate are re-evaluated. Each side
// may use its own value kind (per-player overrides).
class ScaledOfferScorer {
 public:
  ScaledOfferScorer(const GameContext& ctx, const CommitmentState& state, int proposer,
                    int partner, ValueKind proposer_kind, ValueKind partner_kind,
                    const ValueOptions& opts)
      : ctx_(ctx), state_(state), proposer_(proposer), partner_(partner),
        proposer_kind_(proposer_kind), partner_kind_(partner_kind), opts_(opts),
        scale_(ctx.scale()) {
    const int ng = ctx_.num_goals();
    counts_.resize(ng);
    ctx_.satisfaction_counts(state, counts_.data());
    if (proposer_kind_ == ValueKind::kLower || partner_kind_ == ValueKind::kLower) {
      contribs_.resize(ng);
      for (int g = 0; g < ng; ++g) {
        for (const GameContext::Contributor& c : ctx_.contributors(g)) {
          contribs_[g].push_back({c.player, c.required,
                                  ctx_.player_goal_count(state, g, c.player),
                                  ctx_.game().utilities.at(g, c.player) < 0});
        }
      }
    }
    base_proposer_ = full_value(proposer_, proposer_kind_);
    base_partner_ = full_value(partner_, partner_kind_);
    stamp_.assign(ng, -1);
  }

  std::int64_t base_proposer() const { return base_proposer_; }
  std::int64_t base_partner() const { return base_partner_; }

  // Post-state values for (proposer, partner) under the candidate.
  std::pair<std::int64_t, std::int64_t> score(const std::vector<int>& prop_actions,
                                              const std::vector<int>& part_actions) {
    ++candidate_id_;
    touched_.clear();
    auto touch = [&](int slot, bool proposer_side) {
      for (int g : ctx_.goals_touching(slot)) {
        if (stamp_[g] != candidate_id_) {
          stamp_[g] = candidate_id_;
          touched_.push_back({g, 0, 0});
          touched_index_[g] = static_cast<int>(touched_.size()) - 1;
        }
        Touched& t = touched_[touched_index_[g]];
        (proposer_side ? t.add_proposer : t.add_partner) += 1;
      }
    };
    for (int j : prop_actions) touch(ctx_.slot_of(proposer_, j), true);
    for (int j : part_actions) touch(ctx_.slot_of(partner_, j), false);

    std::int64_t dp = 0, dr = 0;
    for (const Touched& t : touched_) {
      dp += goal_delta(t, proposer_, proposer_kind_);
      dr += goal_delta(t, partner_, partner_kind_);
    }
    return {base_proposer_ + dp, base_partner_ + dr};
  }

 private:
  struct Touched {
    int goal;
    std::int32_t add_proposer;
    std::int32_t add_partner;
  };
  struct ContribState {
    int player;
    std::int32_t required;
    std::int32_t committed;
    bool negative;
  };

  std::int64_t full_value(int player, ValueKind kind) {
    std::int64_t acc = 0;
    const int ng = ctx_.num_goals();
    for (int g = 0; g < ng; ++g) acc += goal_contrib(g, player, kind, counts_[g], 0, 0);
    return acc;
  }

  GoalPending pending_with(int g, std::int32_t add_p, std::int32_t add_r) const {
    GoalPending out;
    for (const ContribState& c : contribs_[g]) {
      std::int32_t committed = c.committed;
      if (c.player == proposer_) committed += add_p;
      if (c.player == partner_) committed += add_r;
      if (committed >= c.required) continue;
      out.pending_count += 1;
      out.pending_single = out.pending_count == 1 ? c.player : -1;
      if (c.negative) {
        out.neg_pending_count += 1;
        out.neg_pending_single = out.neg_pending_count == 1 ? c.player : -1;
      }
    }
    return out;
  }

  std::int64_t goal_contrib(int g, int player, ValueKind kind, std::int32_t count,
                            std::int32_t add_p, std::int32_t add_r) const {
    const std::int64_t u = ctx_.game().utilities.at(g, player);
    if (u == 0) return 0;
    const std::int64_t s = ctx_.sat_scaled(g, count);
    switch (kind) {
      case ValueKind::kReward:
        return u * s;
      case ValueKind::kUpper:
        return u > 0 ? u * scale_ : u * s;
      case ValueKind::kLower: {
        std::int64_t acc = u * s;
        if (u < 0 && credible_for(pending_with(g, add_p, add_r), u, player, opts_))
          acc += u * (scale_ - s);
        return acc;
      }
      case ValueKind::kExact:
        break;
    }
    throw ValidationError("ScaledOfferScorer: unsupported value kind");
  }

  std::int64_t goal_delta(const Touched& t, int player, ValueKind kind) const {
    const std::int64_t before = goal_contrib(t.goal, player, kind, counts_[t.goal], 0, 0);
    const std::int64_t after =
        goal_contrib(t.goal, player, kind, counts_[t.goal] + t.add_proposer + t.add_partner,
                     t.add_proposer, t.add_partner);
    return after - before;
  }

  const GameContext& ctx_;
  const CommitmentState& state_;
  int proposer_;
  int partner_;
  ValueKind proposer_kind_;
  ValueKind partner_kind_;
  ValueOptions opts_;
  std::int64_t scale_;
  std::vector<std::int32_t> counts_;
  std::vector<std::vector<ContribState>> contribs_;
  std::int64_t base_proposer_ = 0;
  std::int64_t base_partner_ = 0;
  std::vector<int> stamp_;
  std::vector<int> touched_index_ = std::vector<int>(ctx_.num_goals());
  std::vector<Touched> touched_;
  long candidate_id_ = 0;
};

template <typename Score>
std::optional<JointUpdate> argmax_offer(const GameContext& ctx, const CommitmentState& state,
                                        int proposer, int partner, int k, bool strict,
                                        std::int64_t partner_baseline,
                                        std::int64_t proposer_baseline, Score&& score) {
  std::optional<JointUpdate> best;
  std::int64_t best_val = proposer_baseline;
  bool found = false;
  for_each_feasible_update(ctx, state, proposer, partner, k,
                           [&](const std::vector<int>& a, const std::vector<int>& b) {
                             const auto [pv, rv] = score(a, b);
                             if (rv < partner_baseline) return;
                             const bool better =
                                 strict ? pv > best_val
                                        : (pv > best_val || (!found && pv == best_val));
                             if (better) {
                               best_val = pv;
                               best = JointUpdate{a, b};
                               found = true;
                             }
                           });
  return best;
}

}  // namespace

std::optional<JointUpdate> best_offer(const GameContext& ctx, const CommitmentState& state,
                                      int proposer, int partner,
                                      const ValueApproximation& approx, int k,
                                      const ProtocolConfig& config) {
  if (proposer == partner) throw ValidationError("best_offer: proposer == partner");
  validate_approximation(approx, ctx.num_players());
  if (proposer < 0 || proposer >= ctx.num_players() || partner < 0 ||
      partner >= ctx.num_players())
    throw ValidationError("best_offer: player index out of range");
  const std::uint64_t candidates = count_joint_updates(
      ctx.free_action_count(state, proposer), ctx.free_action_count(state, partner), k);
  if (candidates > config.max_offer_candidates)
    throw TractabilityError("best_offer: " + std::to_string(candidates) +
                            " candidate updates exceed the enumeration guard");

  if (approx.kind == ValueKind::kExact) {
    SolverSession* session = approx.exact;
    if (session == nullptr)
      throw ValidationError("best_offer: exact approximation without a solver session");
    const int np = ctx.num_players();
    std::vector<std::int64_t> v_rej(np), v_new(np);
    CommitmentState rejected = state;
    rejected.turn = state.turn + 1;
    session->exact_value_scaled(rejected, v_rej.data());
    // Exact mode: the proposer must strictly beat the rejection value.
    return argmax_offer(ctx, state, proposer, partner, k, /*strict=*/true, v_rej[partner],
                        v_rej[proposer],
                        [&](const std::vector<int>& a, const std::vector<int>& b) {
                          const CommitmentState post =
                              apply_update(ctx, state, proposer, partner, JointUpdate{a, b},
                                           state.turn + 1);
                          session->exact_value_scaled(post, v_new.data());
                          return std::pair{v_new[proposer], v_new[partner]};
                        });
  }

  if (ctx.scaled_ok()) {
    ScaledOfferScorer scorer(ctx, state, proposer, partner, approx.kind_for(proposer),
                             approx.kind_for(partner), approx.options);
    return argmax_offer(ctx, state, proposer, partner, k, config.require_strict_proposer_gain,
                        scorer.base_partner(), scorer.base_proposer(),
                        [&](const std::vector<int>& a, const std::vector<int>& b) {
                          return scorer.score(a, b);
                        });
  }

  // Rational fallback for games beyond the integer scale guard: same
  // comparisons, evaluated exactly but slowly.
  const PayoffVector base = evaluate(approx, ctx, state);
  std::optional<JointUpdate> best;
  Rational best_val = base[proposer];
  bool found = false;
  for_each_feasible_update(
      ctx, state, proposer, partner, k,
      [&](const std::vector<int>& a, const std::vector<int>& b) {
        const CommitmentState post =
            apply_update(ctx, state, proposer, partner, JointUpdate{a, b}, state.turn);
        const PayoffVector v = evaluate(approx, ctx, post);
        if (v[partner] < base[partner]) return;
        const bool better = config.require_strict_proposer_gain
                                ? v[proposer] > best_val
                                : (v[proposer] > best_val || (!found && v[proposer] == best_val));
        if (better) {
          best_val = v[proposer];
          best = JointUpdate{a, b};
          found = true;
        }
      });
  return best;
}

namespace {

struct MctsNode {
  CommitmentState state;
  bool terminal = false;
  double visits = 0.0;
  std::vector<double> value_sum;
  std::vector<int> children;  // per partner id, -1 until expanded
  int next_untried = 0;
  int parent = -1;
};

}  // namespace

int mcts_select_partner(const GameContext& ctx, const CommitmentState& state, int proposer,
                        const ValueApproximation& approx, const ProtocolConfig& config) {
  validate_protocol_config(config);
  const int np = ctx.num_players();
  if (np < 2) throw ValidationError("mcts_select_partner: no legal partner");
  if (np == 2) return proposer == 0 ? 1 : 0;

  const int horizon = config.horizon(np);
  const double norm =
      static_cast<double>(ctx.game().payoff_denom) * static_cast<double>(ctx.scale());

  auto leaf_values = [&](const CommitmentState& s) {
    std::vector<double> out(np);
    if (!ctx.scaled_ok()) {
      const PayoffVector v = config.leaf_eval == LeafEval::kRawPayoff
                                 ? reward_vector(ctx, s)
                                 : evaluate(approx, ctx, s);
      for (int n = 0; n < np; ++n) out[n] = v[n].to_double();
      return out;
    }
    std::vector<std::int64_t> v(np);
    if (config.leaf_eval == LeafEval::kRawPayoff) {
      std::vector<std::int32_t> counts(ctx.num_goals());
      ctx.satisfaction_counts(s, counts.data());
      reward_scaled(ctx, counts.data(), v.data());
    } else if (approx.kind == ValueKind::kExact) {
      approx.exact->exact_value_scaled(s, v.data());
    } else if (approx.heterogeneous()) {
      for (int n = 0; n < np; ++n)
        v[n] = evaluate_scaled_for(ctx, approx.kind_for(n), approx.options, s, n);
    } else {
      evaluate_scaled(ctx, approx.kind, approx.options, s, v.data());
    }
    for (int n = 0; n < np; ++n) out[n] = static_cast<double>(v[n]) / norm;
    return out;
  };

  std::vector<MctsNode> nodes;
  nodes.push_back(MctsNode{state, state.turn >= horizon, 0.0, std::vector<double>(np, 0.0),
                           std::vector<int>(np, -1), 0, -1});

  auto node_proposer = [&](const MctsNode& n) { return n.state.turn % np; };
  auto advance_untried = [&](MctsNode& n) {
    const int p = node_proposer(n);
    while (n.next_untried < np && (n.next_untried == p || n.children[n.next_untried] != -1))
      ++n.next_untried;
  };
  auto make_child = [&](int parent_id, int partner) {
    const MctsNode& parent = nodes[parent_id];
    const int p = node_proposer(parent);
    const std::optional<JointUpdate> offer =
        best_offer(ctx, parent.state, p, partner, approx, config.k, config);
    CommitmentState next =
        offer ? apply_update(ctx, parent.state, p, partner, *offer, parent.state.turn + 1)
              : parent.state;
    next.turn = parent.state.turn + 1;
    const bool terminal = next.turn >= horizon;
    nodes.push_back(MctsNode{std::move(next), terminal, 0.0, std::vector<double>(np, 0.0),
                             std::vector<int>(np, -1), 0, parent_id});
    return static_cast<int>(nodes.size()) - 1;
  };

  for (int sim = 0; sim < config.mcts_simulations; ++sim) {
    int node = 0;
    // selection
    for (;;) {
      advance_untried(nodes[node]);
      if (nodes[node].terminal || nodes[node].next_untried < np) break;
      const int p = node_proposer(nodes[node]);
      int best_partner = -1;
      double best_ucb = -std::numeric_limits<double>::infinity();
      for (int r = 0; r < np; ++r) {
        if (r == p || nodes[node].children[r] == -1) continue;
        const MctsNode& child = nodes[nodes[node].children[r]];
        double ucb;
        if (child.visits == 0) {
          ucb = std::numeric_limits<double>::infinity();
        } else {
          const double mean = child.value_sum[p] / child.visits / ctx.payoff_span();
          ucb = mean + config.mcts_exploration *
                           std::sqrt(std::log(nodes[node].visits) / child.visits);
        }
        if (ucb > best_ucb) {
          best_ucb = ucb;
          best_partner = r;
        }
      }
      node = nodes[node].children[best_partner];
    }
    // expansion
    if (!nodes[node].terminal) {
      const int r = nodes[node].next_untried;
      const int child = make_child(node, r);
      nodes[node].children[r] = child;
      node = child;
    }
    // evaluation + backpropagation
    const std::vector<double> leaf = leaf_values(nodes[node].state);
    for (int n = node; n != -1; n = nodes[n].parent) {
      nodes[n].visits += 1.0;
      for (int i = 0; i < np; ++i) nodes[n].value_sum[i] += leaf[i];
    }
  }

  int best = -1;
  double best_visits = -1.0;
  for (int r = 0; r < np; ++r) {
    if (r == proposer || nodes[0].children[r] == -1) continue;
    const double v = nodes[nodes[0].children[r]].visits;
    if (v > best_visits) {
      best_visits = v;
      best = r;
    }
  }
  if (best == -1) throw ValidationError("mcts_select_partner: no partner expanded");
  return best;
}

Trace play_game(const GameContext& ctx, const ValueApproximation& approx,
                const ProtocolConfig& config) {
  validate_protocol_config(config);
  const int np = ctx.num_players();
  const int horizon = config.horizon(np);

  std::unique_ptr<SolverSession> owned_session;
  ValueApproximation lens = approx;
  if (lens.kind == ValueKind::kExact && lens.exact == nullptr) {
    owned_session = std::make_unique<SolverSession>(ctx, horizon, config.k, config.solver_limits);
    lens.exact = owned_session.get();
  }
  validate_approximation(lens, np);

  Trace trace;
  trace.game_provenance = ctx.game().provenance;
  trace.method = to_string(lens.kind);
  if (lens.heterogeneous()) {
    trace.method = "mixed:";
    for (int n = 0; n < np; ++n)
      trace.method += (n ? "," : "") + to_string(lens.kind_for(n));
  }
  trace.config = config;

  CommitmentState state = ctx.empty_state();
  for (int t = 0; t < horizon; ++t) {
    const int proposer = t % np;
    TurnRecord record;
    record.turn = t;
    record.proposer = proposer;

    if (lens.kind == ValueKind::kExact) {
      const SolverSession::Decision decision = lens.exact->best_decision(state);
      record.partner = decision.partner;
      record.offer = decision.offer;
    } else {
      const int partner = mcts_select_partner(ctx, state, proposer, lens, config);
      record.partner = partner;
      record.offer = best_offer(ctx, state, proposer, partner, lens, config.k, config);
    }

    record.accepted = record.offer.has_value();
    if (record.accepted)
      state = apply_update(ctx, state, proposer, *record.partner, *record.offer, t + 1);
    else
      state.turn = t + 1;
    record.state_after = state;
    trace.turns.push_back(std::move(record));
  }

  trace.terminal_payoffs = reward_vector(ctx, state);
  return trace;
}

}  // namespace negobench
