#include "slicenego/proposer.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "slicenego/errors.hpp"

namespace slicenego {
namespace {

using json = nlohmann::ordered_json;

constexpr double kEps = 1e-9;

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

std::string_view strip_fence(std::string_view raw) {
  const auto first = raw.find("```");
  if (first == std::string_view::npos) return raw;
  auto body_start = raw.find('\n', first);
  if (body_start == std::string_view::npos) return raw;
  ++body_start;
  const auto last = raw.find("```", body_start);
  if (last == std::string_view::npos) throw ParseError("unterminated code fence");
  return raw.substr(body_start, last - body_start);
}

double required_number(const json& obj, const char* key, std::size_t index) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(fmt::format("candidate {}: missing '{}'", index, key));
  if (!it->is_number()) throw ParseError(fmt::format("candidate {}: '{}' is not numeric", index, key));
  const double v = it->get<double>();
  if (v < 0.0) throw ParseError(fmt::format("candidate {}: '{}' is negative", index, key));
  return v;
}

std::string describe(const Action& a) {
  return fmt::format("({:.2f} MHz, {:.2f} GHz)", a.bandwidth_mhz, a.cpu_ghz);
}

std::vector<Candidate> candidates_from_json(const json& list, std::string_view origin) {
  if (!list.is_array()) throw ParseError(std::string(origin) + ": candidates must be an array");
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& item = list[i];
    if (!item.is_object()) throw ParseError(fmt::format("candidate {} is not an object", i));
    Candidate c;
    c.action.bandwidth_mhz = required_number(item, "proposed_bandwidth_mhz", i);
    c.action.cpu_ghz = required_number(item, "proposed_cpu_ghz", i);
    const auto r = item.find("reasoning");
    if (r == item.end() || !r->is_string()) {
      throw ParseError(fmt::format("candidate {}: 'reasoning' must be a string", i));
    }
    c.reasoning = r->get<std::string>();
    out.push_back(std::move(c));
  }
  return out;
}

void clamp_all(CandidateSet& set, const Action& remaining) {
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    Action& a = set.candidates[i].action;
    const Action before = a;
    if (clamp_action(a, remaining)) {
      set.warnings.push_back(fmt::format("candidate {} {} clamped to {} (pool {})", i,
                                         describe(before), describe(a), describe(remaining)));
    }
  }
}

}  // namespace

bool clamp_action(Action& action, const Action& remaining) {
  const Action before = action;
  action.bandwidth_mhz = std::clamp(action.bandwidth_mhz, 0.0, std::max(0.0, remaining.bandwidth_mhz));
  action.cpu_ghz = std::clamp(action.cpu_ghz, 0.0, std::max(0.0, remaining.cpu_ghz));
  return !(action == before);
}

void HeuristicParams::validate() const {
  if (!(conservative_factor >= 1.0)) throw ParameterError("conservative_factor must be >= 1");
  if (!(aggressive_factor > 0.0 && aggressive_factor <= 1.0)) {
    throw ParameterError("aggressive_factor must lie in (0, 1]");
  }
}

HeuristicProposer::HeuristicProposer(HeuristicParams params) : params_(params) {
  params_.validate();
}

CandidateSet HeuristicProposer::generate(const ProposalContext& ctx) {
  CandidateSet set;
  set.source = "heuristic";
  const RiskAssessment& a = ctx.assessment;
  const std::string state = fmt::format(
      "{} risk {:.2f} ms vs target {:.2f} ms (SLA {:.1f} ms), confidence_score {:.2f}, "
      "compute {:.2f} ms, radio {:.2f} ms",
      ctx.spec.strategy == Strategy::unbiased ? "CVaR" : "mean", a.decision_metric_ms,
      a.dynamic_target_ms, ctx.spec.sla_ms, a.confidence, a.compute_latency_ms,
      a.radio_latency_mean_ms);

  if (ctx.remaining.bandwidth_mhz <= kEps || ctx.remaining.cpu_ghz <= kEps) {
    Candidate only{ctx.current, "DEGENERATE POOL: no spare capacity, holding position. " + state};
    clamp_action(only.action, ctx.remaining);
    set.candidates.assign(kCandidateCount, only);
    set.padded = true;
    set.warnings.push_back("degenerate pool " + describe(ctx.remaining) +
                           ": single candidate repeated");
    return set;
  }

  const Resource hot = bottleneck(a);
  const auto scaled = [](Action base, Resource r, double factor) {
    (r == Resource::bandwidth ? base.bandwidth_mhz : base.cpu_ghz) *= factor;
    return base;
  };
  const Resource cold = hot == Resource::bandwidth ? Resource::cpu : Resource::bandwidth;

  set.candidates.push_back(
      {scaled(ctx.current, hot, params_.conservative_factor),
       fmt::format("CONSERVATIVE PROPOSAL: raise {} (the bottleneck) by {:.0f}%. {}",
                   to_string(hot), (params_.conservative_factor - 1.0) * 100.0, state)});
  set.candidates.push_back(
      {ctx.current, fmt::format("BALANCED PROPOSAL: keep the current request. {}", state)});
  set.candidates.push_back(
      {scaled(ctx.current, cold, params_.aggressive_factor),
       fmt::format("AGGRESSIVE PROPOSAL: cut {} (non-bottleneck) by {:.0f}%. {}", to_string(cold),
                   (1.0 - params_.aggressive_factor) * 100.0, state)});
  clamp_all(set, ctx.remaining);
  return set;
}

ReplayProposer::ReplayProposer(const std::string& transcript_path, std::string agent)
    : agent_(std::move(agent)) {
  std::ifstream in(transcript_path);
  if (!in) throw ProposerError("cannot open replay transcript '" + transcript_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  load(buf.str(), transcript_path);
}

ReplayProposer ReplayProposer::from_text(std::string_view jsonl, std::string agent) {
  ReplayProposer p;
  p.agent_ = std::move(agent);
  p.load(jsonl, "<memory>");
  return p;
}

void ReplayProposer::load(std::string_view jsonl, std::string_view origin) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json event;
    try {
      event = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(fmt::format("{}:{}: {}", origin, line_no, e.what()));
    }
    if (event.value("event", "") != "candidates" || event.value("agent", "") != agent_) continue;
    queue_.push_back(candidates_from_json(event.at("candidates"), origin));
  }
}

CandidateSet ReplayProposer::generate(const ProposalContext& ctx) {
  if (queue_.empty()) {
    throw ProposerError("replay transcript exhausted for agent " + agent_);
  }
  CandidateSet set;
  set.source = "replay";
  set.candidates = std::move(queue_.front());
  queue_.pop_front();
  if (set.candidates.size() != kCandidateCount) {
    throw ProposerError(fmt::format("replay turn for {} holds {} candidates, expected {}", agent_,
                                    set.candidates.size(), kCandidateCount));
  }
  clamp_all(set, ctx.remaining);
  return set;
}

RemoteConfig RemoteConfig::from_environment() {
  RemoteConfig c;
  c.endpoint = env_or_empty(kRemoteEndpointEnv);
  c.model = env_or_empty(kRemoteModelEnv);
  c.api_key = env_or_empty(kRemoteApiKeyEnv);
  return c;
}

RemoteProposer::RemoteProposer(RemoteConfig config, HeuristicParams fallback)
    : config_(std::move(config)), fallback_(fallback) {
  if (config_.retries < 0) throw ParameterError("remote retries must be >= 0");
  if (config_.timeout.count() <= 0) throw ParameterError("remote timeout must be > 0");
}

std::string RemoteProposer::post(const std::string& body) const {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ProposerError("endpoint '" + config_.endpoint + "' has no scheme");
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  const std::string origin = config_.endpoint.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);

  httplib::Client client(origin);
  if (!client.is_valid()) throw ProposerError("unsupported endpoint '" + origin + "'");
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = fmt::format("HTTP {}", res->status);
      continue;
    }
    return res->body;
  }
  throw ProposerError(last_error);
}

CandidateSet RemoteProposer::generate(const ProposalContext& ctx) {
  std::string reason;
  if (config_.endpoint.empty()) {
    reason = std::string("no endpoint configured (") + kRemoteEndpointEnv + ")";
  } else {
    try {
      const json request = {{"model", config_.model}, {"prompt", render_prompt(ctx)}, {"stream", false}};
      std::string body = post(request.dump());
      // Generate-style APIs wrap the model text in a "response" field.
      const json envelope = json::parse(body, nullptr, false);
      if (envelope.is_object() && envelope.contains("response") && envelope["response"].is_string()) {
        body = envelope["response"].get<std::string>();
      }
      CandidateSet set = parse_remote_response(body, ctx.remaining);
      set.source = "remote";
      return set;
    } catch (const std::exception& e) {
      reason = e.what();
    }
  }
  CandidateSet set = fallback_.generate(ctx);
  set.fallback_reason = "remote backend failed: " + reason;
  return set;
}

CandidateSet parse_remote_response(std::string_view raw, const Action& remaining) {
  const std::string_view text = strip_fence(raw);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed proposal document: ") + e.what());
  }
  const json& list = doc.is_object() && doc.contains("candidates") ? doc["candidates"] : doc;
  CandidateSet set;
  set.source = "remote";
  set.candidates = candidates_from_json(list, "remote response");
  if (set.candidates.size() != kCandidateCount) {
    throw ParseError(fmt::format("expected {} candidates, got {}", kCandidateCount,
                                 set.candidates.size()));
  }
  clamp_all(set, remaining);
  return set;
}

std::string serialize_candidates(const CandidateSet& set) {
  json list = json::array();
  for (const auto& c : set.candidates) {
    list.push_back({{"proposed_bandwidth_mhz", c.action.bandwidth_mhz},
                    {"proposed_cpu_ghz", c.action.cpu_ghz},
                    {"reasoning", c.reasoning}});
  }
  return json{{"candidates", list}}.dump();
}

std::string render_prompt(const ProposalContext& ctx) {
  const RiskAssessment& a = ctx.assessment;
  return fmt::format(
      "You are the {name} slice agent negotiating shared RAN bandwidth and edge CPU.\n"
      "Round {round}. Your current request: {cur}. Opponent request: {opp}.\n"
      "Remaining pool available to you: {rem}.\n"
      "Latency SLA {sla:.2f} ms; policy {strategy}; internal target {target:.2f} ms.\n"
      "Predicted mean {mean:.2f} ms, CVaR_{alpha} {cvar:.2f} ms, confidence_score {conf:.2f}.\n"
      "Latency decomposition: compute {comp:.2f} ms, radio {radio:.2f} ms.\n"
      "SLA met: {met}; over-provisioned: {over}.\n"
      "Reply with a JSON array of exactly 3 objects with keys proposed_bandwidth_mhz (number), "
      "proposed_cpu_ghz (number) and reasoning (string). Stay within the remaining pool.\n",
      fmt::arg("name", ctx.spec.name), fmt::arg("round", ctx.round),
      fmt::arg("cur", describe(ctx.current)), fmt::arg("opp", describe(ctx.opponent)),
      fmt::arg("rem", describe(ctx.remaining)), fmt::arg("sla", ctx.spec.sla_ms),
      fmt::arg("strategy", to_string(ctx.spec.strategy)), fmt::arg("target", a.dynamic_target_ms),
      fmt::arg("mean", a.stats.mean_ms), fmt::arg("alpha", ctx.spec.alpha),
      fmt::arg("cvar", a.stats.cvar_alpha_ms), fmt::arg("conf", a.confidence),
      fmt::arg("comp", a.compute_latency_ms), fmt::arg("radio", a.radio_latency_mean_ms),
      fmt::arg("met", a.sla_met), fmt::arg("over", a.over_provisioned));
}

}  // namespace slicenego
