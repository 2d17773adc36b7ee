#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "negobench/core.hpp"
#include "negobench/updates.hpp"

namespace negobench {

struct SolverLimits {
  std::uint64_t max_states = 4'000'000;         // distinct (state, turn) nodes
  std::uint64_t max_actions_per_node = 1'000'000;
};

// Backward induction over the negotiation tree (weak partner acceptance
// against the rejection value, strict proposer improvement), memoized on
// (bit-packed state, turn). One session per thread; the memo table is
// shared across calls, so playing out the optimal path costs nothing
// beyond the root solve.
class SolverSession {
 public:
  SolverSession(const GameContext& ctx, int horizon, int k, SolverLimits limits = {});

  int horizon() const { return horizon_; }
  int budget() const { return k_; }
  std::uint64_t states_explored() const { return static_cast<std::uint64_t>(size_); }

  // Value vector assuming optimal self-interested play from `state`
  // (state.turn identifies the node). Scaled by payoff_denom * scale.
  void exact_value_scaled(const CommitmentState& state, std::int64_t* out);
  PayoffVector exact_value(const CommitmentState& state);

  struct Decision {
    std::optional<int> partner;
    std::optional<JointUpdate> offer;
  };
  // The (partner, offer) the optimal proposer plays at `state`; nullopt
  // fields mean rejection.
  Decision best_decision(const CommitmentState& state);

 private:
  std::uint32_t solve(std::uint64_t bits, int turn);
  std::uint32_t insert(std::uint64_t key);
  std::int64_t* value_at(std::uint32_t idx) { return arena_.data() + static_cast<std::size_t>(idx) * np_; }
  std::uint64_t state_key(std::uint64_t bits, int turn) const {
    return bits | (static_cast<std::uint64_t>(turn) << total_slots_);
  }
  CommitmentState materialize(std::uint64_t bits, int turn) const;

  const GameContext& ctx_;
  int horizon_;
  int k_;
  SolverLimits limits_;
  int np_;
  int total_slots_;
  // open-addressed map: stored key is state_key + 1 (0 = empty slot)
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint32_t> index_;
  std::size_t capacity_mask_ = 0;
  std::size_t size_ = 0;
  std::vector<std::int64_t> arena_;
};

// Convenience: value at `state` under a (horizon, k) protocol.
PayoffVector exact_value(const GameContext& ctx, const CommitmentState& state, int horizon, int k,
                         SolverLimits limits = {});

// r*: exact value at the empty state, t = 0.
PayoffVector optimal_payoffs(const GameContext& ctx, int horizon, int k, SolverLimits limits = {});

enum class WelfareObjective { kUtilitarian, kNash };
enum class WelfareCertificate { kProvedOptimal, kInfeasible };

struct WelfareSolution {
  WelfareObjective objective = WelfareObjective::kUtilitarian;
  WelfareCertificate certificate = WelfareCertificate::kProvedOptimal;
  std::vector<char> assignment;        // per slot, 0/1
  std::vector<Rational> satisfaction;  // per goal
  PayoffVector payoffs;                // y_i
  Rational utilitarian_sum;            // sum y_i of the reported assignment
  double nash_log_sum = 0.0;           // sum log y_i (Nash objective), feasible only
};

// One-shot central-planner optimum over all binary assignments via
// depth-first branch and bound with a per-goal admissible bound; Nash
// maximizes sum log y_i subject to y_i >= delta with exact infeasibility
// pruning. Exclusion sets (topfile games) are honored as hard
// feasibility constraints.
WelfareSolution solve_welfare(const GameContext& ctx, WelfareObjective objective,
                              const Rational& delta = Rational(1, 1000000));

}  // namespace negobench
