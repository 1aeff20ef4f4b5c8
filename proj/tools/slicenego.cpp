#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "slicenego/harness.hpp"

namespace {

using namespace slicenego;

struct Overrides {
  std::string config_path;
  std::optional<std::string> strategy;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<std::string> out;
  std::optional<std::string> proposer;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "Experiment config (JSON); defaults are built in")
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--strategy", o.strategy, "biased | unbiased | both");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--alpha", o.alpha, "CVaR level for both slices, in (0, 1)");
  cmd->add_option("--proposer", o.proposer, "heuristic | replay:<transcript.jsonl> | remote");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config_path.empty() ? default_config() : load_config(o.config_path);
  if (o.strategy) c.strategies = parse_strategy_selector(*o.strategy);
  if (o.trials) c.n_trials = *o.trials;
  if (o.seed) c.master_seed = *o.seed;
  if (o.alpha) {
    for (auto& s : c.slices) s.alpha = *o.alpha;
  }
  if (o.out) c.output_dir = *o.out;
  if (o.proposer) c.proposer.select(*o.proposer);
  if (o.workers) c.workers = *o.workers;
  c.validate();
  return c;
}

int cmd_run(const Overrides& o) {
  const ExperimentConfig c = resolve(o);
  ensure_writable(c.output_dir);
  fmt::print(stderr, "running {} trial(s) x {} strategy(ies), seed {}\n", c.n_trials,
             c.strategy_list().size(), c.master_seed);
  const auto results = run_experiment(c);
  emit_outputs(results, c, c.output_dir);

  fmt::print("{:<9} {:<6} {:>9} {:>10} {:>9} {:>13} {:>14}\n", "strategy", "slice", "completed",
             "violations", "consensus", "tail_ms", "median_saving");
  for (const auto& s : summarize_results(results, c)) {
    fmt::print("{:<9} {:<6} {:>9} {:>10} {:>9} {:>13.3f} {:>14.4f}\n", to_string(s.strategy),
               s.slice, fmt::format("{}/{}", s.completed, s.trials), s.violations, s.consensus,
               s.tail_latency_ms, s.median_saving);
  }
  fmt::print(stderr, "outputs written to {}\n", c.output_dir);
  for (const auto& r : results) {
    if (!r.completed()) return 1;
  }
  return 0;
}

int cmd_negotiate(const Overrides& o, int trial) {
  ExperimentConfig c = resolve(o);
  const std::vector<Strategy> strategies = c.strategy_list();
  bool ok = true;
  for (const Strategy s : strategies) {
    const TrialResult r = run_trial(c, s, trial);
    std::cout << r.transcript;
    fmt::print(stderr, "[{} trial {}] {} after {} round(s): {} ({:.2f} MHz, {:.2f} GHz), {} ({:.2f} MHz, {:.2f} GHz)\n",
               to_string(s), trial, to_string(r.status), r.rounds, c.slices[0].name,
               r.final_allocation[0].bandwidth_mhz, r.final_allocation[0].cpu_ghz, c.slices[1].name,
               r.final_allocation[1].bandwidth_mhz, r.final_allocation[1].cpu_ghz);
    if (!r.completed()) {
      fmt::print(stderr, "  aborted: {}\n", r.abort_reason);
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-aware two-slice resource negotiation simulator"};
  app.footer(fmt::format(
      "Remote proposer settings are read from the environment only:\n"
      "  {}  endpoint URL (http[s]://host[:port]/path), e.g. an /api/generate route\n"
      "  {}     model name sent with each request\n"
      "  {}   optional bearer token\n"
      "Without an endpoint the remote backend falls back to the heuristic one.",
      kRemoteEndpointEnv, kRemoteModelEnv, kRemoteApiKeyEnv));
  app.require_subcommand(1);

  Overrides o;
  int trial = 0;

  auto* run = app.add_subcommand("run", "Run the full experiment and write result tables");
  add_common(run, o);
  run->add_option("-n,--trials", o.trials, "Number of trials per strategy");
  run->add_option("-o,--out", o.out, "Output directory");
  run->add_option("-j,--workers", o.workers, "Worker threads (0 = all cores)");

  auto* nego = app.add_subcommand("negotiate", "Run one trial and print its transcript (JSONL)");
  add_common(nego, o);
  nego->add_option("-t,--trial", trial, "Trial index")->check(CLI::NonNegativeNumber);

  auto* cfg = app.add_subcommand("config", "Print the effective configuration as JSON");
  add_common(cfg, o);
  cfg->add_option("-n,--trials", o.trials, "Number of trials per strategy");
  cfg->add_option("-o,--out", o.out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(o);
    if (nego->parsed()) return cmd_negotiate(o, trial);
    std::cout << config_to_json(resolve(o)).dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
