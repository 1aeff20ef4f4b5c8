#include "slicenego/agent_policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slicenego/errors.hpp"

namespace slicenego {
namespace {

constexpr double kEps = 1e-9;

double& component(Action& a, Resource r) {
  return r == Resource::bandwidth ? a.bandwidth_mhz : a.cpu_ghz;
}
double component(const Action& a, Resource r) {
  return r == Resource::bandwidth ? a.bandwidth_mhz : a.cpu_ghz;
}
double step_of(const SearchParams& p, Resource r) {
  return r == Resource::bandwidth ? p.step_bw_mhz : p.step_cpu_ghz;
}
Resource other(Resource r) {
  return r == Resource::bandwidth ? Resource::cpu : Resource::bandwidth;
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
  return s == Strategy::biased ? "biased" : "unbiased";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "biased") return Strategy::biased;
  if (text == "unbiased") return Strategy::unbiased;
  throw ParameterError("unknown strategy '" + std::string(text) + "'");
}

std::string_view to_string(Resource r) noexcept {
  return r == Resource::bandwidth ? "bandwidth" : "cpu";
}

void SliceSpec::validate() const {
  if (!(sla_ms > 0.0)) throw ParameterError(name + ": sla_ms must be > 0");
  if (!(theta > 0.0 && theta < 1.0)) throw ParameterError(name + ": theta must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError(name + ": alpha must lie in (0, 1)");
}

RiskAssessment assess(const TailStats& stats, double compute_latency_ms,
                      double radio_latency_mean_ms, const SliceSpec& spec) {
  RiskAssessment a;
  a.stats = stats;
  a.compute_latency_ms = compute_latency_ms;
  a.radio_latency_mean_ms = radio_latency_mean_ms;
  // The biased agent still carries the confidence so transcripts line up.
  a.confidence = confidence_score(stats.mean_ms, stats.std_ms);
  if (spec.strategy == Strategy::biased) {
    a.dynamic_target_ms = spec.sla_ms;
    a.decision_metric_ms = stats.mean_ms;
  } else {
    a.dynamic_target_ms = spec.sla_ms * a.confidence;
    a.decision_metric_ms = stats.cvar_alpha_ms;
  }
  a.sla_met = a.decision_metric_ms <= a.dynamic_target_ms;
  a.over_provisioned = a.decision_metric_ms < spec.theta * a.dynamic_target_ms;
  a.satisfied = a.sla_met && !a.over_provisioned;
  return a;
}

RiskAssessment assess(const LatencyDistribution& dist, const SliceSpec& spec) {
  if (dist.stats.alpha != spec.alpha) {
    throw ContractViolation("distribution stats were computed at a different alpha");
  }
  return assess(dist.stats, dist.compute_latency_ms, dist.radio_latency_mean_ms, spec);
}

double score_proposal(const RiskAssessment& assessment, double power, const ScoreParams& params) {
  if (assessment.sla_met) return params.met_reward - power;
  return params.violation_base - (assessment.decision_metric_ms - assessment.dynamic_target_ms);
}

Resource bottleneck(const RiskAssessment& a) noexcept {
  return a.radio_latency_mean_ms >= a.compute_latency_ms ? Resource::bandwidth : Resource::cpu;
}

void SearchParams::validate() const {
  if (!(step_bw_mhz > 0.0) || !(step_cpu_ghz > 0.0)) throw ParameterError("search steps must be > 0");
  if (max_search_iters < 1) throw ParameterError("max_search_iters must be >= 1");
}

SearchResult upward_search(const Action& start, const RiskAssessment& start_assessment,
                           const Action& limit, const Evaluator& evaluate,
                           const SearchParams& search, const PowerParams& power,
                           const ScoreParams& score) {
  SearchResult out{start, start_assessment, {}, false};
  if (start_assessment.sla_met) return out;

  double best_score = score_proposal(start_assessment, power_w(start, power), score);
  Action current = start;
  RiskAssessment current_assessment = start_assessment;

  for (int i = 1; i <= search.max_search_iters; ++i) {
    Resource target = bottleneck(current_assessment);
    if (component(current, target) >= component(limit, target) - kEps) target = other(target);
    if (component(current, target) >= component(limit, target) - kEps) {
      out.limit_reached = true;
      return out;
    }
    Action next = current;
    component(next, target) =
        std::min(component(limit, target), component(current, target) + step_of(search, target));

    const RiskAssessment a = evaluate(next);
    out.attempts.push_back({i, target, next, a, true});
    current = next;
    current_assessment = a;

    const double s = score_proposal(a, power_w(next, power), score);
    if (s > best_score) {
      best_score = s;
      out.action = next;
      out.assessment = a;
    }
    if (a.sla_met) return out;
  }
  out.limit_reached = true;
  return out;
}

SearchResult downward_search(const Action& start, const RiskAssessment& start_assessment,
                             const Evaluator& evaluate, const SearchParams& search) {
  SearchResult out{start, start_assessment, {}, false};
  if (!(start_assessment.sla_met && start_assessment.over_provisioned)) return out;

  // Chosen once from the starting point, then cut repeatedly.
  const Resource target = other(bottleneck(start_assessment));
  const double step = step_of(search, target);

  for (int i = 1; i <= search.max_search_iters; ++i) {
    const double reduced = component(out.action, target) - step;
    if (reduced < step - kEps) {
      out.limit_reached = true;
      return out;
    }
    Action candidate = out.action;
    component(candidate, target) = reduced;
    const RiskAssessment a = evaluate(candidate);
    if (!a.sla_met) {
      out.attempts.push_back({i, target, candidate, a, false});
      return out;
    }
    out.attempts.push_back({i, target, candidate, a, true});
    out.action = candidate;
    out.assessment = a;
    if (!a.over_provisioned) return out;
  }
  out.limit_reached = true;
  return out;
}

}  // namespace slicenego
