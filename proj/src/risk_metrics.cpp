#include "slicenego/risk_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "slicenego/errors.hpp"

namespace slicenego {
namespace {

void check_estimator_args(const SampleSet& samples, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (samples.empty()) {
    throw EstimatorDomainError("tail estimator called on an empty sample set");
  }
}

// 1-based rank of the lower alpha-quantile. The predicate is the same one the
// inf-definition uses (k / N >= alpha), so rounding in alpha * N cannot shift
// the index.
std::size_t quantile_rank(std::size_t n, double alpha) {
  const double dn = static_cast<double>(n);
  auto reaches = [&](std::size_t k) { return static_cast<double>(k) / dn >= alpha; };
  auto k = static_cast<std::size_t>(std::ceil(alpha * dn));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && reaches(k - 1)) --k;
  while (k < n && !reaches(k)) ++k;
  return k;
}

double tail_mean_above(std::span<const double> sorted, double threshold) {
  const auto first = std::upper_bound(sorted.begin(), sorted.end(), threshold);
  if (first == sorted.end()) return threshold;
  const double sum = std::accumulate(first, sorted.end(), 0.0);
  return sum / static_cast<double>(std::distance(first, sorted.end()));
}

}  // namespace

SampleSet::SampleSet(std::vector<double> values) : values_(std::move(values)) {
  for (const double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ContractViolation("latency samples must be finite and non-negative");
    }
  }
  sorted_ = values_;
  std::sort(sorted_.begin(), sorted_.end());
}

double empirical_var(const SampleSet& samples, double alpha) {
  check_estimator_args(samples, alpha);
  const auto sorted = samples.sorted();
  return sorted[quantile_rank(sorted.size(), alpha) - 1];
}

double empirical_cvar(const SampleSet& samples, double alpha) {
  const double var = empirical_var(samples, alpha);
  return tail_mean_above(samples.sorted(), var);
}

double confidence_score(double mean_ms, double std_ms) noexcept {
  if (!(mean_ms > 0.0) || std::isnan(std_ms)) return 0.0;
  return std::clamp(1.0 - std_ms / mean_ms, 0.0, 1.0);
}

TailStats summarize(const SampleSet& samples, double alpha) {
  check_estimator_args(samples, alpha);
  const auto sorted = samples.sorted();
  const double n = static_cast<double>(sorted.size());

  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double sq = 0.0;
  for (const double v : sorted) sq += (v - mean) * (v - mean);

  TailStats out;
  out.alpha = alpha;
  out.mean_ms = mean;
  out.std_ms = std::sqrt(sq / n);
  out.var_alpha_ms = sorted[quantile_rank(sorted.size(), alpha) - 1];
  out.cvar_alpha_ms = tail_mean_above(sorted, out.var_alpha_ms);
  return out;
}

}  // namespace slicenego
