#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace slicenego {

/// Latency samples in milliseconds. Values are validated (finite, >= 0) and
/// sorted once on construction; every estimator reads the cached sorted view.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> sorted() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

 private:
  std::vector<double> values_;
  std::vector<double> sorted_;
};

struct TailStats {
  double mean_ms = 0.0;
  double std_ms = 0.0;  // population standard deviation
  double var_alpha_ms = 0.0;
  double cvar_alpha_ms = 0.0;
  double alpha = 0.0;
};

/// Lower (inverse-CDF) empirical quantile: the smallest sample l with
/// #{x <= l} / N >= alpha. No interpolation.
double empirical_var(const SampleSet& samples, double alpha);

/// Mean of the samples strictly above empirical_var(); falls back to the VaR
/// itself when that strict tail is empty.
double empirical_cvar(const SampleSet& samples, double alpha);

/// max(0, 1 - std/mean) clamped to [0, 1]; a non-positive mean scores 0.
double confidence_score(double mean_ms, double std_ms) noexcept;

TailStats summarize(const SampleSet& samples, double alpha);

}  // namespace slicenego
