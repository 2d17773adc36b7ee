#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "negobench/serialize.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = NEGOBENCH_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("negobench_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("generate is deterministic across invocations") {
  TempDir tmp;
  const std::string a = tmp.file("a.json"), b = tmp.file("b.json");
  REQUIRE(run("generate --players 4 --actions 2 --goals 5 --seed 7 --out " + a +
              " --manifest-out " + tmp.file("a.manifest.json")) == 0);
  REQUIRE(run("generate --players 4 --actions 2 --goals 5 --seed 7 --out " + b +
              " --manifest-out " + tmp.file("b.manifest.json")) == 0);
  CHECK(negobench::read_text_file(a) == negobench::read_text_file(b));
}

TEST_CASE("solve-exact on an oversized game exits 2 and names the limit") {
  TempDir tmp;
  const std::string game = tmp.file("game.json");
  REQUIRE(run("generate --players 6 --actions 3 --goals 6 --seed 3 --out " + game +
              " --manifest-out " + tmp.file("g.manifest.json")) == 0);
  const std::string cmd = kCli + " solve-exact --game " + game +
                          " --rounds 3 --max-states 50 --manifest-out " +
                          tmp.file("s.manifest.json") + " 2> " + tmp.file("err.txt") +
                          " > /dev/null";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  const std::string err = negobench::read_text_file(tmp.file("err.txt"));
  CHECK(err.find("50") != std::string::npos);
}

TEST_CASE("unknown subcommand exits 1") {
  CHECK(run("frobnicate") == 1);
}

TEST_CASE("play then compare matches the library improvement stats") {
  TempDir tmp;
  const std::string game = tmp.file("game.json");
  REQUIRE(run("generate --players 3 --actions 2 --goals 4 --seed 11 --out " + game +
              " --manifest-out " + tmp.file("g.manifest.json")) == 0);
  const std::string ta = tmp.file("reward.trace.json");
  const std::string tb = tmp.file("nn.trace.json");
  REQUIRE(run("play --game " + game + " --value reward --rounds 1 --mcts-sims 8 --trace-out " +
              ta + " --manifest-out " + tmp.file("p1.manifest.json")) == 0);
  REQUIRE(run("play --game " + game + " --value no-negotiation --trace-out " + tb +
              " --manifest-out " + tmp.file("p2.manifest.json")) == 0);
  const std::string out = tmp.file("cmp.json");
  REQUIRE(run("compare " + ta + " " + tb + " --out " + out + " --manifest-out " +
              tmp.file("c.manifest.json")) == 0);

  const json cmp = json::parse(negobench::read_text_file(out));
  const auto a = negobench::trace_terminal_payoffs(json::parse(negobench::read_text_file(ta)));
  const auto b = negobench::trace_terminal_payoffs(json::parse(negobench::read_text_file(tb)));
  negobench::Rational sum(0);
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] - b[i];
  CHECK(cmp["sum"].get<std::string>() == sum.to_string());
}

TEST_CASE("play trace replays byte-identically and manifests record the run") {
  TempDir tmp;
  const std::string game = tmp.file("game.json");
  REQUIRE(run("generate --players 3 --actions 2 --goals 4 --seed 5 --out " + game +
              " --manifest-out " + tmp.file("g.manifest.json")) == 0);
  const std::string t1 = tmp.file("t1.json"), t2 = tmp.file("t2.json");
  const std::string flags = " --value lower --rounds 2 --mcts-sims 16 --seed 99 ";
  REQUIRE(run("play --game " + game + flags + "--trace-out " + t1 + " --manifest-out " +
              tmp.file("m1.json")) == 0);
  REQUIRE(run("play --game " + game + flags + "--trace-out " + t2 + " --manifest-out " +
              tmp.file("m2.json")) == 0);
  CHECK(negobench::read_text_file(t1) == negobench::read_text_file(t2));

  const json m1 = json::parse(negobench::read_text_file(tmp.file("m1.json")));
  CHECK(m1["command"] == "play");
  CHECK(m1["outputs"][0] == t1);
  CHECK(m1.contains("resolved_config"));
  CHECK(m1["inputs"][0]["path"] == game);
  // identical inputs and config: the two manifests differ only in telemetry
  json m2 = json::parse(negobench::read_text_file(tmp.file("m2.json")));
  json m1_cmp = m1, m2_cmp = m2;
  m1_cmp.erase("telemetry");
  m2_cmp.erase("telemetry");
  m1_cmp.erase("outputs");
  m2_cmp.erase("outputs");
  CHECK(m1_cmp == m2_cmp);
}

TEST_CASE("config file fills unset flags, flags win") {
  TempDir tmp;
  const std::string cfg = tmp.file("cfg.json");
  negobench::write_text_file(cfg, json{{"num_players", 5}, {"seed", 21}}.dump());
  const std::string a = tmp.file("a.json");
  REQUIRE(run("generate --config " + cfg + " --goals 4 --out " + a + " --manifest-out " +
              tmp.file("a.m.json")) == 0);
  const json game = json::parse(negobench::read_text_file(a));
  CHECK(game["num_players"] == 5);
  // flag beats config
  const std::string b = tmp.file("b.json");
  REQUIRE(run("generate --config " + cfg + " --players 3 --goals 4 --out " + b +
              " --manifest-out " + tmp.file("b.m.json")) == 0);
  CHECK(json::parse(negobench::read_text_file(b))["num_players"] == 3);
}

TEST_CASE("ingest emits game plus sidecars and llm-play runs against a mock") {
  TempDir tmp;
  const std::string top = tmp.file("top.json");
  negobench::write_text_file(
      top,
      json{{"countries", json::array({"Aldovia", "Brontia"})},
           {"country_actions",
            json{{"Aldovia", json::array({"expand solar"})},
                 {"Brontia", json::array({"fund adaptation", "open market"})}}},
           {"goals", json::array({"joint project"})},
           {"country_data",
            json{{"Aldovia", json{{"goals_value", json{{"joint project", 6}}}}},
                 {"Brontia", json{{"goals_value", json{{"joint project", 2}}}}}}},
           {"goal_satisfaction",
            json::array({json::array({"joint project", 1, "Aldovia", "expand solar"}),
                         json::array({"joint project", 1, "Brontia", "fund adaptation"})})},
           {"mutually_exclusive_agreements", json::array()}}
          .dump());
  const std::string game = tmp.file("game.json");
  const std::string excl = tmp.file("excl.json");
  const std::string names = tmp.file("names.json");
  REQUIRE(run("ingest --topfile " + top + " --out " + game + " --exclusions-out " + excl +
              " --names-out " + names + " --manifest-out " + tmp.file("i.m.json")) == 0);
  CHECK(fs::exists(game));
  CHECK(fs::exists(excl));
  CHECK(fs::exists(names));

  const std::string mock = tmp.file("mock.json");
  negobench::write_text_file(
      mock, json::array({json{{"content", json{{"partner", 1},
                                               {"proposer_additions", json::array({1})},
                                               {"partner_additions", json::array({1, 0})}}}}})
                .dump());
  const std::string trace = tmp.file("llm.trace.json");
  REQUIRE(run("llm-play --game " + game + " --mock " + mock + " --rounds 1 --trace-out " + trace +
              " --exclusions " + excl + " --manifest-out " + tmp.file("l.m.json")) == 0);
  const json t = json::parse(negobench::read_text_file(trace));
  CHECK(t["method"] == "llm");
  CHECK(t["turns"].size() == 2);
}

TEST_CASE("sweep runs a small grid end to end") {
  TempDir tmp;
  const std::string grid = tmp.file("grid.json");
  negobench::write_text_file(
      grid, json{{"axes", json{{"alignment", json::array({"adversarial"})},
                               {"regime", json::array({"balanced"})},
                               {"aon_fraction", json::array({0.0})},
                               {"zipf_alpha", json::array({1.6})},
                               {"latent_dim", json::array({5})}}},
                 {"seeds_per_cell", 2},
                 {"grid_seed", 4},
                 {"num_players", 3},
                 {"num_goals", 4},
                 {"actions_min", 1},
                 {"actions_max", 2},
                 {"protocol", json{{"mcts_sims", 8}}},
                 {"methods", json::array({"reward"})}}
                .dump());
  const std::string out_dir = tmp.file("out");
  REQUIRE(run("sweep --grid " + grid + " --out-dir " + out_dir + " --jobs 2") == 0);
  CHECK(fs::exists(out_dir + "/raw.csv"));
  CHECK(fs::exists(out_dir + "/summary.csv"));
  CHECK(fs::exists(out_dir + "/summary.json"));
  CHECK(fs::exists(out_dir + "/sweep.manifest.json"));
}
