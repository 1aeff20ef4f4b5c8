#include <doctest.h>

#include <map>

#include "slicenego/agent_policy.hpp"
#include "slicenego/errors.hpp"

using namespace slicenego;

namespace {

TailStats stats(double mean, double std, double cvar, double alpha = 0.99999) {
  return {mean, std, cvar, cvar, alpha};
}

SliceSpec spec(double sla, Strategy s, double theta) { return {"x", sla, s, theta, 0.99999}; }

// Toy twin: compute ~ 1/f, radio ~ 1/b, no spread.
struct Toy {
  SliceSpec s;
  double kc = 60.0;
  double kr = 120.0;
  int calls = 0;
  RiskAssessment operator()(const Action& a) {
    ++calls;
    const double c = kc / a.cpu_ghz;
    const double r = kr / a.bandwidth_mhz;
    return assess(stats(c + r, 0.0, c + r), c, r, s);
  }
};

}  // namespace

TEST_CASE("unbiased target scales with confidence") {
  const RiskAssessment a = assess(stats(10.0, 2.0, 7.0), 0.0, 10.0, spec(10, Strategy::unbiased, 0.6));
  CHECK(a.confidence == doctest::Approx(0.8));
  CHECK(a.dynamic_target_ms == doctest::Approx(8.0));
  CHECK(a.decision_metric_ms == 7.0);
  CHECK(a.sla_met);
}

TEST_CASE("reference assessments") {
  const RiskAssessment embb = assess(stats(15.0, 0.0, 16.9), 5, 10, spec(50, Strategy::unbiased, 0.6));
  CHECK(embb.sla_met);
  CHECK(embb.over_provisioned);
  CHECK_FALSE(embb.satisfied);

  const RiskAssessment biased = assess(stats(8.0, 1.0, 12.0), 1, 7, spec(10, Strategy::biased, 0.7));
  CHECK(biased.sla_met);
  CHECK_FALSE(biased.over_provisioned);
  CHECK(biased.satisfied);
  CHECK(biased.dynamic_target_ms == 10.0);
  CHECK(biased.confidence == doctest::Approx(0.875));

  const RiskAssessment urllc = assess(stats(9.0, 0.0, 11.2), 1, 8, spec(10, Strategy::unbiased, 0.6));
  CHECK_FALSE(urllc.sla_met);
  CHECK_FALSE(urllc.satisfied);
}

TEST_CASE("mean-based policy misses the tail") {
  const TailStats t = stats(9.0, 0.5, 12.0);
  const RiskAssessment b = assess(t, 1, 8, spec(10, Strategy::biased, 0.7));
  const RiskAssessment u = assess(t, 1, 8, spec(10, Strategy::unbiased, 0.6));
  CHECK(b.satisfied);
  CHECK_FALSE(u.satisfied);
}

TEST_CASE("lower confidence tightens both predicates") {
  const SliceSpec s = spec(10, Strategy::unbiased, 0.6);
  // CVaR 7: met at C_E 0.8 (target 8), not met at C_E 0.6 (target 6).
  CHECK(assess(stats(10, 2, 7), 0, 1, s).sla_met);
  CHECK_FALSE(assess(stats(10, 4, 7), 0, 1, s).sla_met);
  // CVaR 4.5: over-provisioned at C_E 0.8 (4.5 < 4.8), not at C_E 0.7 (4.5 >= 4.2).
  CHECK(assess(stats(10, 2, 4.5), 0, 1, s).over_provisioned);
  CHECK_FALSE(assess(stats(10, 3, 4.5), 0, 1, s).over_provisioned);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(spec(0, Strategy::biased, 0.7).validate(), ParameterError);
  CHECK_THROWS_AS(spec(10, Strategy::biased, 1.0).validate(), ParameterError);
  CHECK_THROWS_AS((SliceSpec{"x", 10, Strategy::biased, 0.5, 1.0}).validate(), ParameterError);
  CHECK(parse_strategy("biased") == Strategy::biased);
  CHECK(to_string(Strategy::unbiased) == "unbiased");
  CHECK_THROWS_AS(parse_strategy("greedy"), ParameterError);
}

TEST_CASE("proposal score") {
  RiskAssessment met;
  met.sla_met = true;
  CHECK(score_proposal(met, 13.10) == doctest::Approx(86.90));
  RiskAssessment miss;
  miss.decision_metric_ms = 11.23;
  miss.dynamic_target_ms = 10.0;
  CHECK(score_proposal(miss, 16.7) == doctest::Approx(-1001.23));
  miss.decision_metric_ms = 10.0;
  CHECK(score_proposal(miss, 16.7) == -1000.0);
}

TEST_CASE("bottleneck") {
  RiskAssessment a;
  a.compute_latency_ms = 8.81;
  a.radio_latency_mean_ms = 17.6;
  CHECK(bottleneck(a) == Resource::bandwidth);
  a.radio_latency_mean_ms = 8.81;
  CHECK(bottleneck(a) == Resource::bandwidth);
  a.radio_latency_mean_ms = 1.0;
  CHECK(bottleneck(a) == Resource::cpu);
}

TEST_CASE("upward search") {
  Toy toy{spec(10, Strategy::unbiased, 0.6)};
  const Evaluator ev = [&](const Action& a) { return toy(a); };
  const SearchParams sp;
  const PowerParams pw;

  SUBCASE("radio bottleneck grows bandwidth first") {
    const Action start{10, 20};  // compute 3, radio 12
    const SearchResult r = upward_search(start, toy(start), {30, 30}, ev, sp, pw);
    REQUIRE_FALSE(r.attempts.empty());
    CHECK(r.attempts.front().resource == Resource::bandwidth);
    CHECK(r.assessment.sla_met);
    CHECK(power_w(r.action, pw) >= power_w(start, pw));
    CHECK(r.action.bandwidth_mhz <= 30.0);
  }

  SUBCASE("already met returns unchanged") {
    const Action start{30, 30};
    const SearchResult r = upward_search(start, toy(start), {40, 40}, ev, sp, pw);
    CHECK(r.attempts.empty());
    CHECK(r.action == start);
  }

  SUBCASE("no room left") {
    const Action start{5, 5};
    const SearchResult r = upward_search(start, toy(start), {5, 5}, ev, sp, pw);
    CHECK(r.attempts.empty());
    CHECK(r.limit_reached);
    CHECK(r.action == start);
  }

  SUBCASE("exhausted pool returns the best attempt") {
    const Action start{5, 5};
    const SearchResult r = upward_search(start, toy(start), {7, 9}, ev, sp, pw);
    CHECK(r.limit_reached);
    CHECK_FALSE(r.assessment.sla_met);
    CHECK(r.action == Action{7, 9});
  }

  SUBCASE("iteration cap") {
    SearchParams tight = sp;
    tight.max_search_iters = 3;
    toy.calls = 0;
    const Action start{1, 1};
    const SearchResult r = upward_search(start, toy(start), {40, 40}, ev, tight, pw);
    CHECK(r.attempts.size() == 3);
    CHECK(toy.calls == 4);
    CHECK(r.limit_reached);
  }
}

TEST_CASE("downward search follows the reference CPU cuts") {
  const SliceSpec s = spec(50, Strategy::unbiased, 0.6);
  const std::map<double, double> cvar{{14, 26.44}, {12, 27.31}, {10, 26.58},
                                      {8, 26.80},  {6, 29.13},  {4, 36.53}};
  const Evaluator ev = [&](const Action& a) {
    const double m = cvar.at(a.cpu_ghz);
    return assess(stats(m, 0.0, m), 8.81, m - 8.81, s);
  };
  const Action start{14, 14};
  const SearchResult r = downward_search(start, ev(start), ev, SearchParams{});
  CHECK(r.action == Action{14, 4});
  CHECK(r.assessment.stats.cvar_alpha_ms == 36.53);
  CHECK(r.attempts.size() == 5);
  for (const auto& at : r.attempts) {
    CHECK(at.resource == Resource::cpu);
    CHECK(at.accepted);
  }
  CHECK(power_w(r.action, PowerParams{}) <= power_w(start, PowerParams{}));
}

TEST_CASE("downward search edge cases") {
  const SliceSpec s = spec(10, Strategy::unbiased, 0.6);
  Toy toy{s, 60.0, 20.0};
  const Evaluator ev = [&](const Action& a) { return toy(a); };

  SUBCASE("not over-provisioned returns input") {
    const Action start{4, 20};  // compute 3, radio 5, metric 8
    const SearchResult r = downward_search(start, toy(start), ev, SearchParams{});
    CHECK(r.attempts.empty());
    CHECK(r.action == start);
  }

  SUBCASE("a cut that breaks the SLA is discarded") {
    // Compute dominates, so bandwidth is the resource being cut.
    const Evaluator steep = [&](const Action& a) {
      const double m = a.bandwidth_mhz >= 20 ? 5.0 : 50.0;
      return assess(stats(m, 0, m), m - 1.0, 1.0, s);
    };
    const Action start{20, 30};
    const SearchResult r = downward_search(start, steep(start), steep, SearchParams{});
    REQUIRE(r.attempts.size() == 1);
    CHECK_FALSE(r.attempts[0].accepted);
    CHECK(r.action == start);
    CHECK(r.assessment.sla_met);
  }

  SUBCASE("floor of one step") {
    const Evaluator flat = [&](const Action&) { return assess(stats(1, 0, 1), 0.5, 0.6, s); };
    const Action start{20, 3};
    const SearchResult r = downward_search(start, flat(start), flat, SearchParams{});
    CHECK(r.action == start);
    CHECK(r.limit_reached);
  }

  SUBCASE("cap bounds the loop") {
    const Evaluator flat = [&](const Action&) { return assess(stats(1, 0, 1), 0.5, 0.6, s); };
    SearchParams sp;
    sp.max_search_iters = 4;
    const SearchResult r = downward_search({20, 40}, flat({20, 40}), flat, sp);
    CHECK(r.attempts.size() == 4);
    CHECK(r.action == Action{20, 32});
    CHECK(r.limit_reached);
  }
}
