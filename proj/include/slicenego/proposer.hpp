#pragma once

#include <chrono>
#include <deque>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "slicenego/agent_policy.hpp"
#include "slicenego/digital_twin.hpp"

namespace slicenego {

struct Candidate {
  Action action;
  std::string reasoning;
};

struct CandidateSet {
  std::vector<Candidate> candidates;  // always exactly three once emitted
  std::string source;                 // heuristic / replay / remote
  bool padded = false;                // single candidate repeated (degenerate pool)
  std::string fallback_reason;        // set when a backend fell back to the heuristic
  std::vector<std::string> warnings;  // clamps and other non-fatal repairs
};

inline constexpr std::size_t kCandidateCount = 3;

struct ProposalContext {
  SliceSpec spec;
  Action current;
  RiskAssessment assessment;
  Action opponent;
  Action remaining;  // residual pool after the opponent's request
  int round = 1;
};

/// Clamp an action into [0, remaining] componentwise. Returns true if anything moved.
bool clamp_action(Action& action, const Action& remaining);

class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual CandidateSet generate(const ProposalContext& ctx) = 0;
  virtual std::string_view name() const noexcept = 0;
};

struct HeuristicParams {
  double conservative_factor = 1.15;
  double aggressive_factor = 0.85;

  void validate() const;
};

/// Brackets the current operating point: the bottleneck resource scaled up,
/// the point itself, and the non-bottleneck resource scaled down.
class HeuristicProposer final : public Proposer {
 public:
  explicit HeuristicProposer(HeuristicParams params = {});
  CandidateSet generate(const ProposalContext& ctx) override;
  std::string_view name() const noexcept override { return "heuristic"; }

 private:
  HeuristicParams params_;
};

/// Plays back the "candidates" events of a recorded transcript for one agent.
class ReplayProposer final : public Proposer {
 public:
  ReplayProposer(const std::string& transcript_path, std::string agent);
  static ReplayProposer from_text(std::string_view jsonl, std::string agent);

  CandidateSet generate(const ProposalContext& ctx) override;
  std::string_view name() const noexcept override { return "replay"; }
  std::size_t remaining_turns() const noexcept { return queue_.size(); }

 private:
  ReplayProposer() = default;
  void load(std::string_view jsonl, std::string_view origin);

  std::string agent_;
  std::deque<std::vector<Candidate>> queue_;
};

struct RemoteConfig {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string model;
  std::string api_key;
  std::chrono::milliseconds timeout{10000};
  int retries = 1;

  /// SLICENEGO_REMOTE_ENDPOINT, SLICENEGO_REMOTE_MODEL, SLICENEGO_REMOTE_API_KEY.
  static RemoteConfig from_environment();
};

inline constexpr const char* kRemoteEndpointEnv = "SLICENEGO_REMOTE_ENDPOINT";
inline constexpr const char* kRemoteModelEnv = "SLICENEGO_REMOTE_MODEL";
inline constexpr const char* kRemoteApiKeyEnv = "SLICENEGO_REMOTE_API_KEY";

/// One POST per turn with a bounded timeout and retry budget; any transport or
/// parse failure falls back to the heuristic backend and is recorded.
class RemoteProposer final : public Proposer {
 public:
  RemoteProposer(RemoteConfig config, HeuristicParams fallback = {});
  CandidateSet generate(const ProposalContext& ctx) override;
  std::string_view name() const noexcept override { return "remote"; }

 private:
  std::string post(const std::string& body) const;

  RemoteConfig config_;
  HeuristicProposer fallback_;
};

/// Strict parse of a remote reply: a JSON array of three objects (or an object
/// holding it under "candidates"), optionally inside a ``` fence. Values
/// outside `remaining` are clamped with a warning.
CandidateSet parse_remote_response(std::string_view raw, const Action& remaining);

/// Inverse of parse_remote_response for a well-formed set.
std::string serialize_candidates(const CandidateSet& set);

std::string render_prompt(const ProposalContext& ctx);

}  // namespace slicenego
