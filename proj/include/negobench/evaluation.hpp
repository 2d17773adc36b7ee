#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "negobench/core.hpp"
#include "negobench/generator.hpp"
#include "negobench/protocol.hpp"

namespace negobench {

// sum_n |r*_n - r^_n|, exact.
Rational l1_error(const PayoffVector& r_star, const PayoffVector& r_hat);

struct ImprovementStats {
  Rational sum;                // aggregate improvement
  Rational min;                // worst-case per-player improvement
  Rational variance;           // population variance of the deltas
  Rational fraction_improved;  // share of players with delta > 0
};

ImprovementStats improvement_stats(const PayoffVector& a, const PayoffVector& b);

enum class GameSizeClass { kSmall, kLarge };

struct SweepGrid {
  std::vector<Alignment> alignments{Alignment::kAdversarial};
  std::vector<PayoffRegime> regimes{PayoffRegime::kBalanced};
  std::vector<double> aon_fractions{0.0, 0.15, 0.30, 0.50};
  std::vector<double> zipf_alphas{1.6, 3.0};
  std::vector<int> latent_dims{5, 15};
  int seeds_per_cell = 50;
  std::uint64_t grid_seed = 0;
  GameSizeClass size_class = GameSizeClass::kSmall;

  // game shape
  int num_players = 10;
  int num_goals = 15;
  int actions_min = 1;
  int actions_max = 2;
  double noise_sigma = 0.5;
  double cooperative_mean = 1.0;

  ProtocolConfig protocol;
  std::vector<ValueKind> methods{ValueKind::kReward, ValueKind::kUpper, ValueKind::kLower};
  bool compute_exact = true;  // r* rows, small class only
};

nlohmann::json grid_to_json(const SweepGrid& grid);
SweepGrid grid_from_json(const nlohmann::json& j);

struct CellCoord {
  Alignment alignment;
  PayoffRegime regime;
  double aon_fraction;
  double zipf_alpha;
  int latent_dim;
  std::string key() const;
};

// Method name -> payoffs; "no-negotiation" and "rstar" appear alongside
// the value approximations. Failures land in `errors`, never abort.
struct SeedResult {
  int seed_index = 0;
  std::uint64_t seed = 0;
  std::map<std::string, PayoffVector> payoffs;
  std::map<std::string, std::string> errors;
};

struct CellResult {
  CellCoord coord;
  std::vector<SeedResult> seeds;
};

struct SweepTable {
  SweepGrid grid;
  std::vector<CellResult> cells;
};

std::uint64_t cell_seed(std::uint64_t grid_seed, const CellCoord& coord, int seed_index);
GeneratorConfig cell_config(const SweepGrid& grid, const CellCoord& coord, std::uint64_t seed);

SweepTable run_sweep(const SweepGrid& grid, int jobs = 1,
                     const std::function<void(const std::string&)>& log = {});

// raw.csv, summary.csv, summary.json under out_dir.
void emit_report(const SweepTable& table, const std::string& out_dir);

struct MeanSpread {
  double mean = 0.0;
  double se = 0.0;  // sample stdev / sqrt(n)
  double sd = 0.0;  // sample stdev
  int n = 0;
};
MeanSpread mean_spread(const std::vector<double>& xs);

// One-sided paired comparison: true when mean(a - b) < 0 at `confidence`
// (Student t, df = n-1). Valid for n >= 11.
bool paired_mean_less(const std::vector<double>& a, const std::vector<double>& b,
                      double confidence, double* t_stat_out = nullptr);
double t_quantile_one_sided(int df, double confidence);

}  // namespace negobench
