#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "slicenego/errors.hpp"
#include "slicenego/harness.hpp"

using namespace slicenego;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(SLICENEGO_SOURCE_DIR) / "configs";

// Lightly loaded, frozen channel, small twin: fast and comfortably feasible.
ExperimentConfig light_config() {
  ExperimentConfig c = default_config();
  c.n_trials = 3;
  c.system.se_min = c.system.se_max = 6.0;
  c.system.n_mc = 400;
  c.eval_slots = 1200;
  c.slices[0].arrival.mean_rate_mbps = 12.0;
  c.slices[1].arrival.mean_rate_mbps = 8.0;
  c.workers = 2;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / fs::path("slicenego_test_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config round trip and strictness") {
  const ExperimentConfig d = default_config();
  CHECK_NOTHROW(d.validate());
  const auto j = config_to_json(d);
  CHECK(config_to_json(config_from_json(nlohmann::json::parse(j.dump()))) == j);

  // The shipped default file tracks the built-in defaults.
  CHECK(config_to_json(load_config(kConfigs / "default.json")) == j);

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_trails": 3})")), ParseError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"pool": {"b_total": 3}})")), ParseError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"schema_version": 2})")), ParseError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_trials": "many"})")), ParseError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_trials": 0})")), ParameterError);

  ExperimentConfig bad = default_config();
  bad.slices[1].arrival.modulation_period_slots = 250;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = default_config();
  bad.slices[1].name = "eMBB";
  CHECK_THROWS_AS(bad.validate(), ParameterError);

  CHECK_THROWS_AS(load_config(kConfigs / "missing.json"), ParameterError);
}

TEST_CASE("proposer selection") {
  ProposerConfig p;
  p.select("replay:some/file.jsonl");
  CHECK(p.backend == "replay");
  CHECK(p.replay_path == "some/file.jsonl");
  p.select("remote");
  CHECK(p.backend == "remote");
  CHECK_THROWS_AS(p.select("replay:"), ParameterError);
  CHECK_THROWS_AS(p.select("oracle"), ParameterError);
  CHECK(parse_strategy_selector("both") == StrategySelector::both);
  CHECK_THROWS_AS(parse_strategy_selector("either"), ParameterError);
}

TEST_CASE("trial seeds") {
  CHECK(trial_seed(1, 0) == trial_seed(1, 0));
  CHECK(trial_seed(1, 0) != trial_seed(1, 1));
  CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("light load experiment") {
  const ExperimentConfig c = light_config();
  const auto results = run_experiment(c);
  REQUIRE(results.size() == 6);

  for (const auto& r : results) {
    CHECK(r.completed());
    CHECK(r.twin_requests <= r.twin_request_bound);
    CHECK(check_feasibility(r.final_allocation[0], r.final_allocation[1], c.pool));
    CHECK(r.window_latency_ms[0].size() == c.eval_slots - c.system.horizon_slots + 1);
    if (r.strategy == Strategy::unbiased) {
      CHECK_FALSE(r.violation[0]);
      CHECK_FALSE(r.violation[1]);
    }
  }

  // Paired trials see the same opening split.
  for (int k = 0; k < c.n_trials; ++k) {
    CHECK(results[k].baseline == results[c.n_trials + k].baseline);
  }

  const auto summary = summarize_results(results, c);
  REQUIRE(summary.size() == 4);
  for (const auto& s : summary) {
    const std::size_t i = s.slice == c.slices[0].name ? 0 : 1;
    int violations = 0, consensus = 0;
    for (const auto& r : results) {
      if (r.strategy != s.strategy) continue;
      violations += r.violation[i];
      consensus += r.status == NegotiationStatus::consensus;
    }
    CHECK(s.trials == 3);
    CHECK(s.completed == 3);
    CHECK(s.violations == violations);
    CHECK(s.consensus == consensus);
    CHECK(s.tail_latency_ms == doctest::Approx(pooled_quantile(results, s.strategy, i, c.slices[i].alpha)));
  }

  TempDir tmp;
  emit_outputs(results, c, tmp.path);
  for (const char* f : {"trials.csv", "latency_cdf.csv", "energy_cdf.csv", "summary.csv", "diagnostics.csv"}) {
    CHECK(slurp(tmp.path / f).rfind("# schema_version=1\n", 0) == 0);
  }
  CHECK(fs::exists(tmp.path / "transcripts" / "biased_trial_000.jsonl"));
  CHECK(fs::exists(tmp.path / "transcripts" / "unbiased_trial_002.jsonl"));

  std::istringstream cdf(slurp(tmp.path / "latency_cdf.csv"));
  std::string line;
  std::getline(cdf, line);
  std::getline(cdf, line);
  CHECK(line == "strategy,slice,cdf,latency_ms");
  std::map<std::string, std::pair<double, double>> last;
  std::map<std::string, int> rows;
  while (std::getline(cdf, line)) {
    std::stringstream ls(line);
    std::string strat, slice, p, v;
    std::getline(ls, strat, ',');
    std::getline(ls, slice, ',');
    std::getline(ls, p, ',');
    std::getline(ls, v, ',');
    const std::string key = strat + "/" + slice;
    const double pv = std::stod(p), lv = std::stod(v);
    if (rows[key]++ > 0) {
      CHECK(pv > last[key].first);
      CHECK(lv >= last[key].second);
    }
    last[key] = {pv, lv};
  }
  CHECK(rows.size() == 4);
  for (const auto& [k, n] : rows) CHECK(n == 1000);
}

TEST_CASE("single trial is reproducible") {
  ExperimentConfig c = light_config();
  c.n_trials = 1;
  const TrialResult a = run_trial(c, Strategy::unbiased, 0);
  const TrialResult b = run_trial(c, Strategy::unbiased, 0);
  CHECK(a.transcript == b.transcript);
  CHECK(a.window_latency_ms[1] == b.window_latency_ms[1]);
  CHECK(a.final_allocation == b.final_allocation);
}

TEST_CASE("recorded scenario replays to its known outcome") {
  const ExperimentConfig c = load_config(kConfigs / "recorded_scenario.json");
  CHECK(c.proposer.backend == "replay");
  const TrialResult r = run_trial(c, Strategy::unbiased, 0);
  REQUIRE(r.status == NegotiationStatus::consensus);
  CHECK(r.rounds == 2);
  CHECK(r.final_allocation[0] == Action{14.0, 4.0});
  CHECK(r.final_allocation[1] == Action{23.0, 19.5});
}

TEST_CASE("output directory checks") {
  CHECK_THROWS(ensure_writable("/proc/slicenego_cannot_exist/out"));
  TempDir tmp;
  CHECK_NOTHROW(ensure_writable(tmp.path));
  CHECK(fs::is_directory(tmp.path / "transcripts"));
}
