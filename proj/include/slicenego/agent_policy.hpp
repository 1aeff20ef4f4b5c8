#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "slicenego/digital_twin.hpp"
#include "slicenego/power_energy.hpp"
#include "slicenego/risk_metrics.hpp"

namespace slicenego {

enum class Strategy { biased, unbiased };

std::string_view to_string(Strategy s) noexcept;
Strategy parse_strategy(std::string_view text);

struct SliceSpec {
  std::string name;
  double sla_ms = 0.0;
  Strategy strategy = Strategy::unbiased;
  double theta = 0.6;  // over-provision threshold
  double alpha = 0.99999;

  void validate() const;
};

struct RiskAssessment {
  TailStats stats;
  double confidence = 0.0;
  double dynamic_target_ms = 0.0;
  double decision_metric_ms = 0.0;  // mean (biased) or CVaR (unbiased)
  bool sla_met = false;
  bool over_provisioned = false;
  bool satisfied = false;
  double compute_latency_ms = 0.0;
  double radio_latency_mean_ms = 0.0;
};

/// Biased: mean vs the raw SLA. Unbiased: CVaR vs SLA x confidence. Both use
/// satisfied = met && !over_provisioned.
RiskAssessment assess(const LatencyDistribution& dist, const SliceSpec& spec);

/// Same predicates from already-computed stats and latency decomposition.
RiskAssessment assess(const TailStats& stats, double compute_latency_ms,
                      double radio_latency_mean_ms, const SliceSpec& spec);

struct ScoreParams {
  double met_reward = 100.0;
  double violation_base = -1000.0;
};

/// reward - power when the SLA is met, otherwise base - (metric - target).
double score_proposal(const RiskAssessment& assessment, double power,
                      const ScoreParams& params = {});

enum class Resource { bandwidth, cpu };

std::string_view to_string(Resource r) noexcept;

/// Resource whose latency component dominates; ties go to the radio.
Resource bottleneck(const RiskAssessment& a) noexcept;

struct SearchParams {
  double step_bw_mhz = 1.0;
  double step_cpu_ghz = 2.0;
  int max_search_iters = 20;

  void validate() const;
};

struct SearchAttempt {
  int index = 0;
  Resource resource = Resource::bandwidth;
  Action action;
  RiskAssessment assessment;
  bool accepted = false;
};

struct SearchResult {
  Action action;
  RiskAssessment assessment;
  std::vector<SearchAttempt> attempts;
  bool limit_reached = false;  // pool exhausted / floor hit / iteration cap
};

using Evaluator = std::function<RiskAssessment(const Action&)>;

/// Grow the bottleneck resource by one step at a time (inside `limit`) until
/// the SLA predicate holds. Returns the best-scoring action evaluated.
SearchResult upward_search(const Action& start, const RiskAssessment& start_assessment,
                           const Action& limit, const Evaluator& evaluate,
                           const SearchParams& search, const PowerParams& power,
                           const ScoreParams& score = {});

/// Shrink the non-bottleneck resource while the SLA stays met and the action
/// is still over-provisioned. A step that breaks the SLA is discarded.
SearchResult downward_search(const Action& start, const RiskAssessment& start_assessment,
                             const Evaluator& evaluate, const SearchParams& search);

}  // namespace slicenego
