#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "../support/oracles.hpp"
#include "slicenego/errors.hpp"
#include "slicenego/risk_metrics.hpp"

using namespace slicenego;

namespace {

std::vector<double> iota_ms(int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

}  // namespace

TEST_CASE("VaR on small reference arrays") {
  CHECK(empirical_var(SampleSet(iota_ms(100)), 0.95) == 95.0);
  CHECK(empirical_var(SampleSet(std::vector<double>(1000, 7.0)), 0.3) == 7.0);
  CHECK(empirical_var(SampleSet({1, 2, 3, 4}), 0.5) == 2.0);
  CHECK(empirical_var(SampleSet({4, 3, 1, 2}), 0.5) == 2.0);
}

TEST_CASE("CVaR averages the strict upper tail") {
  CHECK(empirical_cvar(SampleSet(iota_ms(100)), 0.95) == 98.0);
  CHECK(empirical_cvar(SampleSet(std::vector<double>(1000, 7.0)), 0.99999) == 7.0);
  const SampleSet big(iota_ms(100000));
  CHECK(empirical_var(big, 0.99999) == 99999.0);
  CHECK(empirical_cvar(big, 0.99999) == 100000.0);
}

TEST_CASE("summarize bundles all statistics") {
  const SampleSet s(iota_ms(100));
  const TailStats t = summarize(s, 0.95);
  CHECK(t.mean_ms == 50.5);
  CHECK(t.var_alpha_ms == 95.0);
  CHECK(t.cvar_alpha_ms == 98.0);
  CHECK(t.alpha == 0.95);
  CHECK(t.std_ms == doctest::Approx(28.86607));

  const TailStats flat = summarize(SampleSet(std::vector<double>(10, 7.0)), 0.9);
  CHECK(flat.mean_ms == 7.0);
  CHECK(flat.std_ms == 0.0);
  CHECK(flat.var_alpha_ms == 7.0);
  CHECK(flat.cvar_alpha_ms == 7.0);
}

TEST_CASE("estimator errors") {
  CHECK_THROWS_AS(empirical_var(SampleSet{}, 0.5), EstimatorDomainError);
  CHECK_THROWS_AS(empirical_cvar(SampleSet{}, 0.5), EstimatorDomainError);
  CHECK_THROWS_AS(empirical_var(SampleSet({1.0}), 0.0), ParameterError);
  CHECK_THROWS_AS(empirical_var(SampleSet({1.0}), 1.0), ParameterError);
  CHECK_THROWS_AS(summarize(SampleSet({1.0}), -0.1), ParameterError);
  CHECK_THROWS_AS(SampleSet({1.0, -2.0}), ContractViolation);
  CHECK_THROWS_AS(SampleSet({1.0, std::nan("")}), ContractViolation);
}

TEST_CASE("confidence score") {
  CHECK(confidence_score(10.0, 0.0) == 1.0);
  CHECK(confidence_score(10.0, 12.0) == 0.0);
  CHECK(confidence_score(10.0, 0.6) == doctest::Approx(0.94));
  CHECK(confidence_score(0.0, 1.0) == 0.0);
  CHECK(confidence_score(-3.0, 1.0) == 0.0);
  double prev = 1.0;
  for (double sd = 0.5; sd < 10.0; sd += 0.5) {
    const double c = confidence_score(10.0, sd);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("oracle equivalence on random grid arrays") {
  SplitMix64 gen(7);
  for (int i = 0; i < 500; ++i) {
    const auto xs = testing::grid_array(gen, 1 + gen() % 12);
    const double alpha = testing::grid_alpha(gen);
    const SampleSet s(xs);
    REQUIRE(empirical_var(s, alpha) == testing::brute_var(xs, alpha));
    REQUIRE(empirical_cvar(s, alpha) == testing::brute_cvar(xs, alpha));
    REQUIRE(summarize(s, alpha).cvar_alpha_ms == empirical_cvar(s, alpha));
  }
}

TEST_CASE("tail properties") {
  SplitMix64 gen(11);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> xs(1 + gen() % 50);
    for (auto& x : xs) x = uniform(gen, 0.0, 20.0);
    const SampleSet s(xs);
    const double mx = *std::max_element(xs.begin(), xs.end());

    double a1 = uniform(gen, 0.01, 0.98);
    double a2 = uniform(gen, a1, 0.99);
    CHECK(empirical_var(s, a1) <= empirical_var(s, a2));
    CHECK(empirical_cvar(s, a1) <= empirical_cvar(s, a2));

    const TailStats t = summarize(s, a1);
    CHECK(t.mean_ms <= t.cvar_alpha_ms + 1e-12);
    CHECK(t.cvar_alpha_ms <= mx);
    CHECK(t.var_alpha_ms <= t.cvar_alpha_ms);

    // Equivariance is exact for shifts and scalings that keep values on the
    // same binary grid; use a power-of-two scale and an integer shift over
    // integer data.
    std::vector<double> ints(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) ints[k] = std::floor(xs[k]);
    std::vector<double> shifted(ints), scaled(ints);
    for (auto& v : shifted) v += 3.0;
    for (auto& v : scaled) v *= 4.0;
    const SampleSet si(ints);
    CHECK(empirical_var(SampleSet(shifted), a1) == empirical_var(si, a1) + 3.0);
    CHECK(empirical_var(SampleSet(scaled), a1) == empirical_var(si, a1) * 4.0);
    CHECK(empirical_cvar(SampleSet(shifted), a1) == doctest::Approx(empirical_cvar(si, a1) + 3.0));
    CHECK(empirical_cvar(SampleSet(scaled), a1) == doctest::Approx(empirical_cvar(si, a1) * 4.0));
  }
}
