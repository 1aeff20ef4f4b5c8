#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "slicenego/agent_policy.hpp"
#include "slicenego/digital_twin.hpp"
#include "slicenego/power_energy.hpp"
#include "slicenego/proposer.hpp"

namespace slicenego {

struct ResourcePool {
  double b_total_mhz = 40.0;
  double f_total_ghz = 40.0;

  void validate() const;
};

inline constexpr double kFeasibilityTolerance = 1e-9;

/// Each resource split in proportion to the offered loads, exhausting the
/// pool. A zero total load falls back to an equal split.
std::array<Action, 2> prop_fair_split(const ResourcePool& pool, const std::array<double, 2>& loads);

bool check_feasibility(const Action& proposal, const Action& opponent, const ResourcePool& pool);

/// Capacity left once the opponent's request is granted (never negative).
Action residual_pool(const ResourcePool& pool, const Action& opponent);

/// An agent's private predictive twin, frozen at the negotiation instant.
/// Evaluations are memoised per (seed, action); every request is counted.
class TwinHandle {
 public:
  TwinHandle(SliceSpec spec, ArrivalProcess forecast, SystemConstants consts, QueueState state);
  virtual ~TwinHandle() = default;

  RiskAssessment evaluate(const Action& action, std::uint64_t seed);

  const SliceSpec& spec() const noexcept { return spec_; }
  std::size_t requests() const noexcept { return requests_; }
  std::size_t rollouts() const noexcept { return cache_.size(); }

 protected:
  virtual LatencyDistribution predict(const Action& action, std::uint64_t seed) const;

 private:
  SliceSpec spec_;
  ArrivalProcess forecast_;
  SystemConstants consts_;
  QueueState state_;
  std::map<std::tuple<std::uint64_t, double, double>, RiskAssessment> cache_;
  std::size_t requests_ = 0;
};

/// Line-delimited event log; field order is fixed so output is byte-stable.
class Transcript {
 public:
  using Event = nlohmann::ordered_json;

  void add(Event event);
  const std::vector<Event>& events() const noexcept { return events_; }
  std::string to_jsonl() const;

 private:
  std::vector<Event> events_;
};

enum class TurnOrder { initiator_first, worse_margin_first };

std::string_view to_string(TurnOrder order) noexcept;
TurnOrder parse_turn_order(std::string_view text);

struct NegotiationParams {
  int n_rounds = 5;
  TurnOrder turn_order = TurnOrder::initiator_first;
  SearchParams search;
  PowerParams power;
  ScoreParams score;
  bool verify = true;

  void validate() const;
};

enum class NegotiationStatus { consensus, max_rounds_exhausted, aborted };

std::string_view to_string(NegotiationStatus status) noexcept;

struct Agent {
  TwinHandle* twin = nullptr;
  Proposer* proposer = nullptr;
};

struct NegotiationOutcome {
  NegotiationStatus status = NegotiationStatus::aborted;
  int rounds = 0;
  std::array<Action, 2> allocations;
  std::array<RiskAssessment, 2> committed;     // last in-protocol assessment
  std::array<RiskAssessment, 2> verification;  // fresh-seed re-check of the final split
  bool verified = false;     // consensus and both re-checks satisfied
  bool verification_ran = false;
  std::size_t twin_requests = 0;
  std::size_t twin_request_bound = 0;
  std::string abort_reason;
  Transcript transcript;
};

/// Upper bound on twin requests for a negotiation with these parameters.
std::size_t twin_request_bound(const NegotiationParams& params);

/// Alternating two-agent protocol. Agent 0 is the initiator. `seed` drives all
/// twin evaluations: one substream per (agent, round), plus one for the
/// post-negotiation verification.
NegotiationOutcome run_negotiation(const std::array<Agent, 2>& agents, const ResourcePool& pool,
                                   const std::array<Action, 2>& initial,
                                   const NegotiationParams& params, std::uint64_t seed);

}  // namespace slicenego
