#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slicenego/agent_policy.hpp"
#include "slicenego/digital_twin.hpp"
#include "slicenego/negotiation.hpp"
#include "slicenego/power_energy.hpp"
#include "slicenego/proposer.hpp"

namespace slicenego {

inline constexpr int kSchemaVersion = 1;

struct SliceConfig {
  std::string name;
  double sla_ms = 0.0;
  double theta_biased = 0.7;
  double theta_unbiased = 0.6;
  double alpha = 0.99999;
  ArrivalProcess arrival;

  SliceSpec spec(Strategy strategy) const;
  void validate(const SystemConstants& consts) const;
};

enum class StrategySelector { biased, unbiased, both };

std::string_view to_string(StrategySelector s) noexcept;
StrategySelector parse_strategy_selector(std::string_view text);

struct ProposerConfig {
  std::string backend = "heuristic";  // heuristic | replay | remote
  std::string replay_path;
  HeuristicParams heuristic;
  int remote_timeout_ms = 10000;
  int remote_retries = 1;

  /// Accepts "heuristic", "remote" or "replay:<path>".
  void select(std::string_view spec);
};

struct ExperimentConfig {
  int n_trials = 20;
  std::uint64_t master_seed = 20240601;
  StrategySelector strategies = StrategySelector::both;
  ResourcePool pool;
  SystemConstants system;
  PowerParams power;
  NegotiationParams negotiation;
  std::array<SliceConfig, 2> slices;
  std::size_t warmup_slots = 600;
  std::size_t eval_slots = 3000;
  ProposerConfig proposer;
  std::string output_dir = "results";
  int workers = 0;  // 0: hardware concurrency

  void validate() const;
  std::vector<Strategy> strategy_list() const;
};

ExperimentConfig default_config();
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

struct TrialResult {
  Strategy strategy = Strategy::unbiased;
  int trial = 0;
  NegotiationStatus status = NegotiationStatus::aborted;
  int rounds = 0;
  std::array<Action, 2> baseline;
  std::array<Action, 2> final_allocation;
  std::array<RiskAssessment, 2> committed;
  std::array<RiskAssessment, 2> verification;
  bool verified = false;
  bool verification_ran = false;
  std::array<std::vector<double>, 2> window_latency_ms;
  std::array<double, 2> max_latency_ms{};
  std::array<bool, 2> violation{};
  std::array<double, 2> energy_saving{};
  std::size_t twin_requests = 0;
  std::size_t twin_request_bound = 0;
  std::string abort_reason;
  std::string transcript;  // JSONL
  std::string transcript_file;

  bool completed() const noexcept { return status != NegotiationStatus::aborted; }
};

/// Seed of trial k. Independent of the strategy, so both strategies see
/// the same traffic and world spectral efficiency.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

TrialResult run_trial(const ExperimentConfig& config, Strategy strategy, int trial);

std::vector<TrialResult> run_experiment(const ExperimentConfig& config);

/// Lower empirical quantile over the per-window latencies of one slice and
/// strategy, pooled across completed trials.
double pooled_quantile(const std::vector<TrialResult>& results, Strategy strategy,
                       std::size_t slice, double q);

struct SliceSummary {
  Strategy strategy = Strategy::unbiased;
  std::string slice;
  int trials = 0;
  int completed = 0;
  int aborted = 0;
  int consensus = 0;
  int violations = 0;
  int verification_failures = 0;
  double tail_latency_ms = 0.0;  // pooled quantile at the slice alpha
  double median_saving = 0.0;
  double mean_saving = 0.0;
};

std::vector<SliceSummary> summarize_results(const std::vector<TrialResult>& results,
                                            const ExperimentConfig& config);

/// Fails early if the directory cannot be created or written.
void ensure_writable(const std::filesystem::path& dir);

/// trials.csv, latency_cdf.csv, energy_cdf.csv, summary.csv, transcripts/.
void emit_outputs(const std::vector<TrialResult>& results, const ExperimentConfig& config,
                  const std::filesystem::path& dir);

}  // namespace slicenego
