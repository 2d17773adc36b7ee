#include "negobench/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "negobench/baselines.hpp"
#include "negobench/serialize.hpp"
#include "negobench/solvers.hpp"

namespace negobench {

using nlohmann::json;

Rational l1_error(const PayoffVector& r_star, const PayoffVector& r_hat) {
  if (r_star.size() != r_hat.size()) throw ValidationError("l1_error: length mismatch");
  Rational acc(0);
  for (std::size_t i = 0; i < r_star.size(); ++i) acc += (r_star[i] - r_hat[i]).abs();
  return acc;
}

ImprovementStats improvement_stats(const PayoffVector& a, const PayoffVector& b) {
  if (a.size() != b.size()) throw ValidationError("improvement_stats: length mismatch");
  if (a.empty()) throw ValidationError("improvement_stats: empty vectors");
  const auto n = static_cast<std::int64_t>(a.size());
  std::vector<Rational> delta(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) delta[i] = a[i] - b[i];

  ImprovementStats stats;
  stats.sum = Rational(0);
  stats.min = delta[0];
  std::int64_t improved = 0;
  for (const Rational& d : delta) {
    stats.sum += d;
    if (d < stats.min) stats.min = d;
    if (d > Rational(0)) ++improved;
  }
  const Rational mean = stats.sum / Rational(n);
  Rational var(0);
  for (const Rational& d : delta) {
    const Rational c = d - mean;
    var += c * c;
  }
  stats.variance = var / Rational(n);
  stats.fraction_improved = Rational(improved, n);
  return stats;
}

// ---------------------------------------------------------------------------
// Grid plumbing
// ---------------------------------------------------------------------------

std::string CellCoord::key() const {
  std::ostringstream os;
  os << to_string(alignment) << "|" << to_string(regime) << "|aon=" << aon_fraction
     << "|alpha=" << zipf_alpha << "|d=" << latent_dim;
  return os.str();
}

std::uint64_t cell_seed(std::uint64_t grid_seed, const CellCoord& coord, int seed_index) {
  std::string material = "cell-seed|" + std::to_string(grid_seed) + "|" + coord.key() + "|" +
                         std::to_string(seed_index);
  return mix64(fnv1a64(material));
}

GeneratorConfig cell_config(const SweepGrid& grid, const CellCoord& coord, std::uint64_t seed) {
  GeneratorConfig config;
  config.num_players = grid.num_players;
  config.num_goals = grid.num_goals;
  config.actions_per_player = grid.actions_min;
  config.actions_per_player_max = grid.actions_max > grid.actions_min ? grid.actions_max : 0;
  config.latent_dim = coord.latent_dim;
  config.alignment = coord.alignment;
  config.payoff_regime = coord.regime;
  config.aon_fraction = coord.aon_fraction;
  config.zipf_alpha = coord.zipf_alpha;
  config.noise_sigma = grid.noise_sigma;
  config.cooperative_mean = grid.cooperative_mean;
  config.seed = seed;
  return config;
}

json grid_to_json(const SweepGrid& grid) {
  json j;
  json alignments = json::array();
  for (Alignment a : grid.alignments) alignments.push_back(to_string(a));
  json regimes = json::array();
  for (PayoffRegime r : grid.regimes) regimes.push_back(to_string(r));
  j["axes"] = json{{"alignment", alignments},
                   {"regime", regimes},
                   {"aon_fraction", grid.aon_fractions},
                   {"zipf_alpha", grid.zipf_alphas},
                   {"latent_dim", grid.latent_dims}};
  j["seeds_per_cell"] = grid.seeds_per_cell;
  j["grid_seed"] = grid.grid_seed;
  j["size_class"] = grid.size_class == GameSizeClass::kSmall ? "small" : "large";
  j["num_players"] = grid.num_players;
  j["num_goals"] = grid.num_goals;
  j["actions_min"] = grid.actions_min;
  j["actions_max"] = grid.actions_max;
  j["noise_sigma"] = grid.noise_sigma;
  j["cooperative_mean"] = grid.cooperative_mean;
  j["protocol"] = protocol_config_to_json(grid.protocol);
  json methods = json::array();
  for (ValueKind k : grid.methods) methods.push_back(to_string(k));
  j["methods"] = methods;
  j["compute_exact"] = grid.compute_exact;
  return j;
}

SweepGrid grid_from_json(const json& j) {
  SweepGrid grid;
  if (j.contains("axes")) {
    const json& axes = j["axes"];
    if (axes.contains("alignment")) {
      grid.alignments.clear();
      for (const json& a : axes["alignment"])
        grid.alignments.push_back(alignment_from_string(a.get<std::string>()));
    }
    if (axes.contains("regime")) {
      grid.regimes.clear();
      for (const json& r : axes["regime"])
        grid.regimes.push_back(regime_from_string(r.get<std::string>()));
    }
    if (axes.contains("aon_fraction"))
      grid.aon_fractions = axes["aon_fraction"].get<std::vector<double>>();
    if (axes.contains("zipf_alpha"))
      grid.zipf_alphas = axes["zipf_alpha"].get<std::vector<double>>();
    if (axes.contains("latent_dim"))
      grid.latent_dims = axes["latent_dim"].get<std::vector<int>>();
  }
  grid.seeds_per_cell = j.value("seeds_per_cell", grid.seeds_per_cell);
  grid.grid_seed = j.value("grid_seed", grid.grid_seed);
  const std::string size = j.value("size_class", std::string{"small"});
  if (size == "small")
    grid.size_class = GameSizeClass::kSmall;
  else if (size == "large")
    grid.size_class = GameSizeClass::kLarge;
  else
    throw ValidationError("grid: unknown size_class '" + size + "'");
  grid.num_players = j.value("num_players", grid.num_players);
  grid.num_goals = j.value("num_goals", grid.num_goals);
  grid.actions_min = j.value("actions_min", grid.actions_min);
  grid.actions_max = j.value("actions_max", grid.actions_max);
  grid.noise_sigma = j.value("noise_sigma", grid.noise_sigma);
  grid.cooperative_mean = j.value("cooperative_mean", grid.cooperative_mean);
  if (j.contains("protocol")) grid.protocol = protocol_config_from_json(j["protocol"]);
  if (j.contains("methods")) {
    grid.methods.clear();
    for (const json& m : j["methods"])
      grid.methods.push_back(value_kind_from_string(m.get<std::string>()));
  }
  grid.compute_exact = j.value("compute_exact", grid.compute_exact);
  if (grid.seeds_per_cell < 1) throw ValidationError("grid: seeds_per_cell must be >= 1");
  if (grid.alignments.empty() || grid.regimes.empty() || grid.aon_fractions.empty() ||
      grid.zipf_alphas.empty() || grid.latent_dims.empty())
    throw ValidationError("grid: every axis needs at least one value");
  return grid;
}

// ---------------------------------------------------------------------------
// Sweep runner
// ---------------------------------------------------------------------------

namespace {

std::vector<CellCoord> expand_cells(const SweepGrid& grid) {
  std::vector<CellCoord> cells;
  for (Alignment a : grid.alignments)
    for (PayoffRegime r : grid.regimes)
      for (double aon : grid.aon_fractions)
        for (double alpha : grid.zipf_alphas)
          for (int d : grid.latent_dims) cells.push_back(CellCoord{a, r, aon, alpha, d});
  return cells;
}

SeedResult run_seed(const SweepGrid& grid, const CellCoord& coord, int seed_index) {
  SeedResult out;
  out.seed_index = seed_index;
  out.seed = cell_seed(grid.grid_seed, coord, seed_index);
  const GeneratorConfig config = cell_config(grid, coord, out.seed);

  try {
    const Game game = generate_game(config);
    const GameContext ctx(game);

    for (ValueKind kind : grid.methods) {
      const std::string name = to_string(kind);
      try {
        ValueApproximation approx;
        approx.kind = kind;
        const Trace trace = play_game(ctx, approx, grid.protocol);
        out.payoffs[name] = trace.terminal_payoffs;
      } catch (const std::exception& e) {
        out.errors[name] = e.what();
      }
    }
    try {
      out.payoffs["no-negotiation"] = no_negotiation(ctx).payoffs;
    } catch (const std::exception& e) {
      out.errors["no-negotiation"] = e.what();
    }
    if (grid.compute_exact && grid.size_class == GameSizeClass::kSmall) {
      try {
        out.payoffs["rstar"] =
            optimal_payoffs(ctx, grid.protocol.horizon(ctx.num_players()), grid.protocol.k,
                            grid.protocol.solver_limits);
      } catch (const std::exception& e) {
        out.errors["rstar"] = e.what();
      }
    }
  } catch (const std::exception& e) {
    out.errors["generate"] = e.what();
  }
  return out;
}

}  // namespace

SweepTable run_sweep(const SweepGrid& grid, int jobs,
                     const std::function<void(const std::string&)>& log) {
  SweepTable table;
  table.grid = grid;
  const std::vector<CellCoord> cells = expand_cells(grid);
  table.cells.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    table.cells[c].coord = cells[c];
    table.cells[c].seeds.resize(grid.seeds_per_cell);
  }

  struct Task {
    std::size_t cell;
    int seed_index;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int s = 0; s < grid.seeds_per_cell; ++s) tasks.push_back({c, s});

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      table.cells[t.cell].seeds[t.seed_index] = run_seed(grid, cells[t.cell], t.seed_index);
      if (log && (i + 1) % 50 == 0) {
        std::lock_guard<std::mutex> lock(log_mutex);
        log("sweep: " + std::to_string(i + 1) + "/" + std::to_string(tasks.size()) + " tasks");
      }
    }
  };

  const int n_threads = std::max(1, jobs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  return table;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

MeanSpread mean_spread(const std::vector<double>& xs) {
  MeanSpread out;
  out.n = static_cast<int>(xs.size());
  if (out.n == 0) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / out.n;
  if (out.n >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / (out.n - 1));
    out.se = out.sd / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

// Shortest representation that parses back to the same double.
std::string fmt_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

void emit_report(const SweepTable& table, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  // Raw rows: one per (cell, seed, method, player), plus error rows.
  {
    std::ofstream raw(out_dir + "/raw.csv", std::ios::binary);
    raw << "alignment,regime,aon_fraction,zipf_alpha,latent_dim,seed_index,cell_seed,method,"
           "status,player,payoff_num,payoff_den,payoff,error\n";
    for (const CellResult& cell : table.cells) {
      const std::string coord = to_string(cell.coord.alignment) + "," +
                                to_string(cell.coord.regime) + "," +
                                fmt_double(cell.coord.aon_fraction) + "," +
                                fmt_double(cell.coord.zipf_alpha) + "," +
                                std::to_string(cell.coord.latent_dim);
      for (const SeedResult& seed : cell.seeds) {
        const std::string base = coord + "," + std::to_string(seed.seed_index) + "," +
                                 std::to_string(seed.seed);
        for (const auto& [method, payoffs] : seed.payoffs) {
          for (std::size_t n = 0; n < payoffs.size(); ++n) {
            raw << base << "," << method << ",ok," << n << "," << payoffs[n].num() << ","
                << payoffs[n].den() << "," << fmt_double(payoffs[n].to_double()) << ",\n";
          }
        }
        for (const auto& [method, error] : seed.errors)
          raw << base << "," << method << ",error,,,,," << csv_escape(error) << "\n";
      }
    }
  }

  // Cell-level summaries.
  json summary_json = json::array();
  {
    std::ofstream sum(out_dir + "/summary.csv", std::ios::binary);
    sum << "alignment,regime,aon_fraction,zipf_alpha,latent_dim,method,n,l1_mean,l1_se,l1_sd,"
           "sum_delta_nn_mean,sum_delta_nn_se,sum_delta_nn_sd,fraction_improved_mean\n";
    for (const CellResult& cell : table.cells) {
      for (ValueKind kind : table.grid.methods) {
        const std::string method = to_string(kind);
        std::vector<double> l1s, sum_deltas, fracs;
        for (const SeedResult& seed : cell.seeds) {
          auto it = seed.payoffs.find(method);
          if (it == seed.payoffs.end()) continue;
          auto rstar = seed.payoffs.find("rstar");
          if (rstar != seed.payoffs.end())
            l1s.push_back(l1_error(rstar->second, it->second).to_double());
          auto nn = seed.payoffs.find("no-negotiation");
          if (nn != seed.payoffs.end()) {
            const ImprovementStats st = improvement_stats(it->second, nn->second);
            sum_deltas.push_back(st.sum.to_double());
            fracs.push_back(st.fraction_improved.to_double());
          }
        }
        const MeanSpread l1 = mean_spread(l1s);
        const MeanSpread sd = mean_spread(sum_deltas);
        const MeanSpread fr = mean_spread(fracs);
        sum << to_string(cell.coord.alignment) << "," << to_string(cell.coord.regime) << ","
            << fmt_double(cell.coord.aon_fraction) << "," << fmt_double(cell.coord.zipf_alpha)
            << "," << cell.coord.latent_dim << "," << method << "," << sd.n << ","
            << (l1.n ? fmt_double(l1.mean) : "") << "," << (l1.n ? fmt_double(l1.se) : "") << ","
            << (l1.n ? fmt_double(l1.sd) : "") << "," << fmt_double(sd.mean) << ","
            << fmt_double(sd.se) << "," << fmt_double(sd.sd) << "," << fmt_double(fr.mean)
            << "\n";
        json row;
        row["alignment"] = to_string(cell.coord.alignment);
        row["regime"] = to_string(cell.coord.regime);
        row["aon_fraction"] = cell.coord.aon_fraction;
        row["zipf_alpha"] = cell.coord.zipf_alpha;
        row["latent_dim"] = cell.coord.latent_dim;
        row["method"] = method;
        row["n"] = sd.n;
        if (l1.n) {
          row["l1"] = json{{"mean", l1.mean}, {"se", l1.se}, {"sd", l1.sd}, {"n", l1.n}};
        }
        row["sum_delta_vs_no_negotiation"] =
            json{{"mean", sd.mean}, {"se", sd.se}, {"sd", sd.sd}, {"n", sd.n}};
        row["fraction_improved_mean"] = fr.mean;
        summary_json.push_back(std::move(row));
      }
    }
  }
  std::ofstream js(out_dir + "/summary.json", std::ios::binary);
  js << json{{"grid", grid_to_json(table.grid)}, {"cells", summary_json}}.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Paired one-sided comparison
// ---------------------------------------------------------------------------

namespace {

// Acklam-style rational approximation of the standard normal quantile.
double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p <= 0.0 || p >= 1.0) throw ValidationError("normal_quantile: p out of range");
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > 1 - plow) {
    const double q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

}  // namespace

double t_quantile_one_sided(int df, double confidence) {
  if (df < 10) throw ValidationError("t_quantile_one_sided: df must be >= 10");
  // Cornish-Fisher expansion around the normal quantile; plenty accurate
  // for the df range used here (error < 1e-3 at df >= 10).
  const double z = normal_quantile(confidence);
  const double z3 = z * z * z;
  const double z5 = z3 * z * z;
  const double z7 = z5 * z * z;
  const double v = df;
  return z + (z3 + z) / (4 * v) + (5 * z5 + 16 * z3 + 3 * z) / (96 * v * v) +
         (3 * z7 + 19 * z5 + 17 * z3 - 15 * z) / (384 * v * v * v);
}

bool paired_mean_less(const std::vector<double>& a, const std::vector<double>& b,
                      double confidence, double* t_stat_out) {
  if (a.size() != b.size()) throw ValidationError("paired_mean_less: length mismatch");
  const int n = static_cast<int>(a.size());
  if (n < 11) throw ValidationError("paired_mean_less: need at least 11 pairs");
  std::vector<double> diff(n);
  for (int i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const MeanSpread d = mean_spread(diff);
  double t;
  if (d.sd == 0.0) {
    t = d.mean < 0 ? -std::numeric_limits<double>::infinity()
                   : (d.mean > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  } else {
    t = d.mean / (d.sd / std::sqrt(static_cast<double>(n)));
  }
  if (t_stat_out) *t_stat_out = t;
  return t < -t_quantile_one_sided(n - 1, confidence);
}

}  // namespace negobench
