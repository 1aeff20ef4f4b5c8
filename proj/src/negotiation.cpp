#include "slicenego/negotiation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "slicenego/errors.hpp"
#include "slicenego/rng.hpp"

namespace slicenego {
namespace {

using json = nlohmann::ordered_json;

json action_json(const Action& a) {
  return {{"bandwidth_mhz", a.bandwidth_mhz}, {"cpu_ghz", a.cpu_ghz}};
}

json assessment_json(const RiskAssessment& a) {
  return {{"mean_ms", a.stats.mean_ms},
          {"std_ms", a.stats.std_ms},
          {"var_ms", a.stats.var_alpha_ms},
          {"cvar_ms", a.stats.cvar_alpha_ms},
          {"confidence", a.confidence},
          {"target_ms", a.dynamic_target_ms},
          {"metric_ms", a.decision_metric_ms},
          {"compute_ms", a.compute_latency_ms},
          {"radio_ms", a.radio_latency_mean_ms},
          {"sla_met", a.sla_met},
          {"over_provisioned", a.over_provisioned},
          {"satisfied", a.satisfied}};
}

json with(json base, const json& extra) {
  for (const auto& [k, v] : extra.items()) base[k] = v;
  return base;
}

std::uint64_t round_seed(std::uint64_t seed, std::size_t agent, int round) {
  return derive_seed(derive_seed(seed, agent), static_cast<std::uint64_t>(round));
}

}  // namespace

void ResourcePool::validate() const {
  if (!(b_total_mhz > 0.0) || !(f_total_ghz > 0.0)) {
    throw ParameterError("resource pool totals must be > 0");
  }
}

std::array<Action, 2> prop_fair_split(const ResourcePool& pool, const std::array<double, 2>& loads) {
  pool.validate();
  if (!(loads[0] >= 0.0) || !(loads[1] >= 0.0)) throw ParameterError("loads must be >= 0");
  const double total = loads[0] + loads[1];
  const double share0 = total > 0.0 ? loads[0] / total : 0.5;
  std::array<Action, 2> out;
  out[0] = {pool.b_total_mhz * share0, pool.f_total_ghz * share0};
  // Remainder form keeps b_0 + b_1 == total exactly.
  out[1] = {pool.b_total_mhz - out[0].bandwidth_mhz, pool.f_total_ghz - out[0].cpu_ghz};
  return out;
}

bool check_feasibility(const Action& proposal, const Action& opponent, const ResourcePool& pool) {
  return proposal.bandwidth_mhz + opponent.bandwidth_mhz <= pool.b_total_mhz + kFeasibilityTolerance &&
         proposal.cpu_ghz + opponent.cpu_ghz <= pool.f_total_ghz + kFeasibilityTolerance;
}

Action residual_pool(const ResourcePool& pool, const Action& opponent) {
  return {std::max(0.0, pool.b_total_mhz - opponent.bandwidth_mhz),
          std::max(0.0, pool.f_total_ghz - opponent.cpu_ghz)};
}

TwinHandle::TwinHandle(SliceSpec spec, ArrivalProcess forecast, SystemConstants consts,
                       QueueState state)
    : spec_(std::move(spec)), forecast_(forecast), consts_(consts), state_(state) {
  spec_.validate();
  forecast_.validate();
  consts_.validate();
}

RiskAssessment TwinHandle::evaluate(const Action& action, std::uint64_t seed) {
  ++requests_;
  const auto key = std::make_tuple(seed, action.bandwidth_mhz, action.cpu_ghz);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  const RiskAssessment a = assess(predict(action, seed), spec_);
  cache_.emplace(key, a);
  return a;
}

LatencyDistribution TwinHandle::predict(const Action& action, std::uint64_t seed) const {
  return predict_distribution(state_, action, forecast_, consts_, seed, spec_.alpha);
}

void Transcript::add(Event event) { events_.push_back(std::move(event)); }

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += e.dump();
    out += '\n';
  }
  return out;
}

std::string_view to_string(TurnOrder order) noexcept {
  return order == TurnOrder::initiator_first ? "initiator_first" : "worse_margin_first";
}

TurnOrder parse_turn_order(std::string_view text) {
  if (text == "initiator_first") return TurnOrder::initiator_first;
  if (text == "worse_margin_first") return TurnOrder::worse_margin_first;
  throw ParameterError("unknown turn order '" + std::string(text) + "'");
}

std::string_view to_string(NegotiationStatus status) noexcept {
  switch (status) {
    case NegotiationStatus::consensus: return "consensus";
    case NegotiationStatus::max_rounds_exhausted: return "max_rounds_exhausted";
    case NegotiationStatus::aborted: break;
  }
  return "aborted";
}

void NegotiationParams::validate() const {
  if (n_rounds < 1) throw ParameterError("n_rounds must be >= 1");
  search.validate();
  power.validate();
}

std::size_t twin_request_bound(const NegotiationParams& params) {
  const std::size_t per_turn =
      kCandidateCount + static_cast<std::size_t>(params.search.max_search_iters);
  return static_cast<std::size_t>(params.n_rounds) * (2 + 2 * per_turn) + 2;
}

namespace {

struct TurnContext {
  const std::array<Agent, 2>& agents;
  const ResourcePool& pool;
  const NegotiationParams& params;
  Transcript& transcript;
};

// One counter-proposal turn for agent i; returns the proposed action and its
// assessment under the agent's round seed.
std::pair<Action, RiskAssessment> take_turn(TurnContext& tc, std::size_t i, int round,
                                            const std::array<Action, 2>& alloc,
                                            const RiskAssessment& current_assessment,
                                            std::uint64_t seed) {
  TwinHandle& twin = *tc.agents[i].twin;
  const std::string& name = twin.spec().name;
  const Action& opponent = alloc[1 - i];
  const Action remaining = residual_pool(tc.pool, opponent);

  tc.transcript.add({{"event", "turn"}, {"round", round}, {"agent", name},
                     {"constraints", action_json(remaining)}});

  const ProposalContext ctx{twin.spec(), alloc[i], current_assessment, opponent, remaining, round};
  CandidateSet set = tc.agents[i].proposer->generate(ctx);
  if (set.candidates.size() != kCandidateCount) {
    throw ProposerError(fmt::format("{} proposer returned {} candidates", name, set.candidates.size()));
  }
  for (auto& c : set.candidates) {
    if (clamp_action(c.action, remaining)) set.warnings.push_back("candidate clamped to residual pool");
  }

  json cands = json::array();
  for (const auto& c : set.candidates) {
    cands.push_back({{"proposed_bandwidth_mhz", c.action.bandwidth_mhz},
                     {"proposed_cpu_ghz", c.action.cpu_ghz},
                     {"reasoning", c.reasoning}});
  }
  tc.transcript.add({{"event", "candidates"}, {"round", round}, {"agent", name},
                     {"source", set.source}, {"padded", set.padded},
                     {"fallback_reason", set.fallback_reason}, {"warnings", set.warnings},
                     {"candidates", cands}});

  std::size_t best = 0;
  bool best_met = false;
  double best_power = 0.0;
  double best_score = 0.0;
  std::vector<RiskAssessment> tested;
  for (std::size_t k = 0; k < set.candidates.size(); ++k) {
    const Action& a = set.candidates[k].action;
    const RiskAssessment r = twin.evaluate(a, seed);
    const double p = power_w(a, tc.params.power);
    const double s = score_proposal(r, p, tc.params.score);
    tested.push_back(r);
    tc.transcript.add(with({{"event", "candidate_test"}, {"round", round}, {"agent", name},
                            {"index", k}, {"action", action_json(a)}, {"power_w", p}, {"score", s}},
                           assessment_json(r)));
    // Cheapest candidate that meets the SLA; otherwise the least-bad score.
    const bool better = k == 0 || (r.sla_met && (!best_met || p < best_power)) ||
                        (!r.sla_met && !best_met && s > best_score);
    if (better) {
      best = k;
      best_met = r.sla_met;
      best_power = p;
      best_score = s;
    }
  }
  tc.transcript.add({{"event", "selection"}, {"round", round}, {"agent", name}, {"index", best},
                     {"action", action_json(set.candidates[best].action)}, {"score", best_score},
                     {"sla_met", best_met}});

  Action chosen = set.candidates[best].action;
  RiskAssessment chosen_assessment = tested[best];
  const Evaluator evaluate = [&twin, seed](const Action& a) { return twin.evaluate(a, seed); };

  std::string direction;
  SearchResult sr;
  if (!chosen_assessment.sla_met) {
    direction = "upward";
    sr = upward_search(chosen, chosen_assessment, remaining, evaluate, tc.params.search,
                       tc.params.power, tc.params.score);
  } else if (chosen_assessment.over_provisioned) {
    direction = "downward";
    sr = downward_search(chosen, chosen_assessment, evaluate, tc.params.search);
  }
  if (!direction.empty()) {
    for (const auto& at : sr.attempts) {
      tc.transcript.add(with({{"event", "search"}, {"round", round}, {"agent", name},
                              {"direction", direction}, {"attempt", at.index},
                              {"resource", to_string(at.resource)}, {"action", action_json(at.action)},
                              {"accepted", at.accepted}},
                             assessment_json(at.assessment)));
    }
    tc.transcript.add({{"event", "search_end"}, {"round", round}, {"agent", name},
                       {"direction", direction}, {"limit_reached", sr.limit_reached},
                       {"action", action_json(sr.action)}});
    chosen = sr.action;
    chosen_assessment = sr.assessment;
  }

  const Action before = chosen;
  if (clamp_action(chosen, remaining)) {
    tc.transcript.add({{"event", "clamp"}, {"round", round}, {"agent", name},
                       {"from", action_json(before)}, {"to", action_json(chosen)}});
    chosen_assessment = twin.evaluate(chosen, seed);
  }
  if (!check_feasibility(chosen, opponent, tc.pool)) {
    throw ContractViolation(name + " proposal infeasible after clamping");
  }

  const std::string reasoning = fmt::format(
      "{} [Internal DT Test: final selected proposal. {} {:.2f} ms vs target {:.2f} ms, SLA met: "
      "{}, predicted power {:.2f} W]",
      set.candidates[best].reasoning,
      twin.spec().strategy == Strategy::unbiased ? "CVaR" : "mean",
      chosen_assessment.decision_metric_ms, chosen_assessment.dynamic_target_ms,
      chosen_assessment.sla_met, power_w(chosen, tc.params.power));
  tc.transcript.add({{"event", "propose_action"}, {"round", round}, {"agent", name},
                     {"proposed_bandwidth_mhz", chosen.bandwidth_mhz},
                     {"proposed_cpu_ghz", chosen.cpu_ghz}, {"reasoning", reasoning}});
  return {chosen, chosen_assessment};
}

std::array<std::size_t, 2> turn_order(const std::array<Agent, 2>& agents,
                                      const std::array<RiskAssessment, 2>& a, TurnOrder order) {
  if (order == TurnOrder::initiator_first) return {0, 1};
  const auto margin = [&](std::size_t i) {
    return (a[i].dynamic_target_ms - a[i].decision_metric_ms) / agents[i].twin->spec().sla_ms;
  };
  const double m0 = margin(0);
  const double m1 = margin(1);
  if (m1 < m0) return {1, 0};
  if (m0 < m1) return {0, 1};
  return agents[1].twin->spec().sla_ms < agents[0].twin->spec().sla_ms
             ? std::array<std::size_t, 2>{1, 0}
             : std::array<std::size_t, 2>{0, 1};
}

}  // namespace

NegotiationOutcome run_negotiation(const std::array<Agent, 2>& agents, const ResourcePool& pool,
                                   const std::array<Action, 2>& initial,
                                   const NegotiationParams& params, std::uint64_t seed) {
  pool.validate();
  params.validate();
  for (const auto& a : agents) {
    if (a.twin == nullptr || a.proposer == nullptr) {
      throw ParameterError("each agent needs a twin and a proposer");
    }
  }
  if (!check_feasibility(initial[0], initial[1], pool)) {
    throw ParameterError("initial allocation exceeds the resource pool");
  }

  NegotiationOutcome out;
  out.allocations = initial;
  out.twin_request_bound = twin_request_bound(params);
  Transcript& tr = out.transcript;
  const std::array<std::string, 2> names{agents[0].twin->spec().name, agents[1].twin->spec().name};
  const auto split_json = [&](const std::array<Action, 2>& a) {
    return json{{names[0], action_json(a[0])}, {names[1], action_json(a[1])}};
  };
  const std::size_t requests_before = agents[0].twin->requests() + agents[1].twin->requests();

  json agent_info = json::array();
  for (const auto& a : agents) {
    const SliceSpec& s = a.twin->spec();
    agent_info.push_back({{"name", s.name}, {"strategy", to_string(s.strategy)},
                          {"sla_ms", s.sla_ms}, {"theta", s.theta}, {"alpha", s.alpha},
                          {"proposer", a.proposer->name()}});
  }
  tr.add({{"event", "start"}, {"n_rounds", params.n_rounds},
          {"pool", {{"b_total_mhz", pool.b_total_mhz}, {"f_total_ghz", pool.f_total_ghz}}},
          {"turn_order", to_string(params.turn_order)}, {"agents", agent_info},
          {"initial", split_json(initial)}});

  out.status = NegotiationStatus::max_rounds_exhausted;
  try {
    TurnContext tc{agents, pool, params, tr};
    for (int r = 1; r <= params.n_rounds; ++r) {
      out.rounds = r;
      tr.add({{"event", "round"}, {"round", r}, {"allocations", split_json(out.allocations)}});
      std::array<RiskAssessment, 2> eval;
      for (std::size_t i = 0; i < 2; ++i) {
        eval[i] = agents[i].twin->evaluate(out.allocations[i], round_seed(seed, i, r));
        tr.add(with({{"event", "evaluation"}, {"round", r}, {"agent", names[i]},
                     {"action", action_json(out.allocations[i])}},
                    assessment_json(eval[i])));
      }
      out.committed = eval;
      if (eval[0].satisfied && eval[1].satisfied) {
        out.status = NegotiationStatus::consensus;
        tr.add({{"event", "consensus"}, {"round", r}});
        break;
      }
      for (const std::size_t i : turn_order(agents, eval, params.turn_order)) {
        if (eval[i].satisfied) {
          tr.add({{"event", "hold"}, {"round", r}, {"agent", names[i]}});
          continue;
        }
        auto [action, assessment] =
            take_turn(tc, i, r, out.allocations, eval[i], round_seed(seed, i, r));
        out.allocations[i] = action;
        out.committed[i] = assessment;
      }
    }

    if (params.verify) {
      const std::uint64_t vseed = derive_seed(seed, "verify");
      bool all = true;
      for (std::size_t i = 0; i < 2; ++i) {
        out.verification[i] = agents[i].twin->evaluate(out.allocations[i], vseed);
        all = all && out.verification[i].satisfied;
        tr.add(with({{"event", "verification"}, {"agent", names[i]},
                     {"action", action_json(out.allocations[i])}},
                    assessment_json(out.verification[i])));
      }
      out.verification_ran = true;
      out.verified = out.status == NegotiationStatus::consensus && all;
    }
  } catch (const std::exception& e) {
    out.status = NegotiationStatus::aborted;
    out.abort_reason = e.what();
  }

  out.twin_requests = agents[0].twin->requests() + agents[1].twin->requests() - requests_before;
  json outcome{{"event", "outcome"}, {"status", to_string(out.status)}, {"rounds", out.rounds},
               {"allocations", split_json(out.allocations)}, {"verified", out.verified},
               {"twin_requests", out.twin_requests}};
  if (!out.abort_reason.empty()) outcome["abort_reason"] = out.abort_reason;
  tr.add(std::move(outcome));
  return out;
}

}  // namespace slicenego
