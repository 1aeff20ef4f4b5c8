#include "slicenego/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "slicenego/errors.hpp"
#include "slicenego/rng.hpp"

namespace slicenego {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Reads known keys into pre-filled defaults and rejects anything else, so a
// misspelt key is an error instead of a silently ignored setting.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("{}.{}: {}", where(), key, e.what()));
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ParseError(fmt::format("unknown config key '{}'", sub(k.c_str())));
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_arrival(const json& j, const std::string& path, ArrivalProcess& a) {
  Reader r(j, path);
  r.get("mean_rate_mbps", a.mean_rate_mbps);
  r.get("modulation_amplitude", a.modulation_amplitude);
  r.get("modulation_period_slots", a.modulation_period_slots);
  r.get("burst_exponent", a.burst_exponent);
  r.get("jitter_fraction", a.jitter_fraction);
  r.get("packet_bytes", a.packet_bytes);
  r.finish();
}

void read_slice(const json& j, const std::string& path, SliceConfig& s) {
  Reader r(j, path);
  r.get("name", s.name);
  r.get("sla_ms", s.sla_ms);
  r.get("theta_biased", s.theta_biased);
  r.get("theta_unbiased", s.theta_unbiased);
  r.get("alpha", s.alpha);
  if (const json* a = r.child("arrival")) read_arrival(*a, r.sub("arrival"), s.arrival);
  r.finish();
}

ojson arrival_json(const ArrivalProcess& a) {
  return {{"mean_rate_mbps", a.mean_rate_mbps},
          {"modulation_amplitude", a.modulation_amplitude},
          {"modulation_period_slots", a.modulation_period_slots},
          {"burst_exponent", a.burst_exponent},
          {"jitter_fraction", a.jitter_fraction},
          {"packet_bytes", a.packet_bytes}};
}

std::string transcript_name(Strategy s, int trial) {
  return fmt::format("{}_trial_{:03d}.jsonl", to_string(s), trial);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::unique_ptr<Proposer> make_proposer(const ProposerConfig& pc, const std::string& agent) {
  if (pc.backend == "heuristic") return std::make_unique<HeuristicProposer>(pc.heuristic);
  if (pc.backend == "replay") return std::make_unique<ReplayProposer>(pc.replay_path, agent);
  RemoteConfig rc = RemoteConfig::from_environment();
  rc.timeout = std::chrono::milliseconds(pc.remote_timeout_ms);
  rc.retries = pc.remote_retries;
  return std::make_unique<RemoteProposer>(std::move(rc), pc.heuristic);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string header() { return fmt::format("# schema_version={}\n", kSchemaVersion); }

std::string num(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

SliceSpec SliceConfig::spec(Strategy strategy) const {
  return {name, sla_ms, strategy, strategy == Strategy::biased ? theta_biased : theta_unbiased,
          alpha};
}

void SliceConfig::validate(const SystemConstants& consts) const {
  if (name.empty()) throw ParameterError("slice name must not be empty");
  spec(Strategy::biased).validate();
  spec(Strategy::unbiased).validate();
  arrival.validate();
  if (!(arrival.mean_rate_mbps > 0.0)) throw ParameterError(name + ": mean_rate_mbps must be > 0");
  if (consts.horizon_slots % arrival.modulation_period_slots != 0) {
    throw ParameterError(fmt::format("{}: modulation_period_slots ({}) must divide horizon_slots ({})",
                                     name, arrival.modulation_period_slots, consts.horizon_slots));
  }
}

std::string_view to_string(StrategySelector s) noexcept {
  switch (s) {
    case StrategySelector::biased: return "biased";
    case StrategySelector::unbiased: return "unbiased";
    case StrategySelector::both: break;
  }
  return "both";
}

StrategySelector parse_strategy_selector(std::string_view text) {
  if (text == "both") return StrategySelector::both;
  return parse_strategy(text) == Strategy::biased ? StrategySelector::biased
                                                  : StrategySelector::unbiased;
}

void ProposerConfig::select(std::string_view spec) {
  if (spec == "heuristic" || spec == "remote") {
    backend = std::string(spec);
  } else if (spec.rfind("replay:", 0) == 0 && spec.size() > 7) {
    backend = "replay";
    replay_path = std::string(spec.substr(7));
  } else {
    throw ParameterError("proposer must be heuristic, remote or replay:<path>");
  }
}

void ExperimentConfig::validate() const {
  if (n_trials < 1) throw ParameterError("n_trials must be >= 1");
  if (workers < 0) throw ParameterError("workers must be >= 0");
  pool.validate();
  system.validate();
  power.validate();
  negotiation.validate();
  for (const auto& s : slices) s.validate(system);
  if (slices[0].name == slices[1].name) throw ParameterError("slice names must differ");
  if (eval_slots < system.horizon_slots) {
    throw ParameterError("eval_slots must cover at least one horizon window");
  }
  proposer.heuristic.validate();
  if (proposer.backend == "replay" && proposer.replay_path.empty()) {
    throw ParameterError("replay proposer needs a transcript path");
  }
  if (proposer.backend != "heuristic" && proposer.backend != "replay" &&
      proposer.backend != "remote") {
    throw ParameterError("unknown proposer backend '" + proposer.backend + "'");
  }
  if (proposer.remote_timeout_ms <= 0 || proposer.remote_retries < 0) {
    throw ParameterError("remote timeout must be > 0 and retries >= 0");
  }
}

std::vector<Strategy> ExperimentConfig::strategy_list() const {
  switch (strategies) {
    case StrategySelector::biased: return {Strategy::biased};
    case StrategySelector::unbiased: return {Strategy::unbiased};
    case StrategySelector::both: break;
  }
  return {Strategy::biased, Strategy::unbiased};
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.slices[0].name = "eMBB";
  c.slices[0].sla_ms = 50.0;
  c.slices[0].arrival = {45.0, 1.0, 600, 2.0, 0.1, 0.0};
  c.slices[1].name = "URLLC";
  c.slices[1].sla_ms = 10.0;
  c.slices[1].arrival = {30.0, 1.0, 300, 2.0, 0.1, 0.0};
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c = default_config();
  Reader r(j, "");
  int schema = kSchemaVersion;
  r.get("schema_version", schema);
  if (schema != kSchemaVersion) throw ParseError(fmt::format("unsupported schema_version {}", schema));
  r.get("n_trials", c.n_trials);
  r.get("master_seed", c.master_seed);
  std::string strategies(to_string(c.strategies));
  r.get("strategies", strategies);
  c.strategies = parse_strategy_selector(strategies);
  r.get("warmup_slots", c.warmup_slots);
  r.get("eval_slots", c.eval_slots);
  r.get("output_dir", c.output_dir);
  r.get("workers", c.workers);

  if (const json* p = r.child("pool")) {
    Reader pr(*p, "pool");
    pr.get("b_total_mhz", c.pool.b_total_mhz);
    pr.get("f_total_ghz", c.pool.f_total_ghz);
    pr.finish();
  }
  if (const json* s = r.child("system")) {
    Reader sr(*s, "system");
    sr.get("tau_s", c.system.tau_s);
    sr.get("cpu_rate_mbps_per_ghz", c.system.cpu_rate_mbps_per_ghz);
    sr.get("se_min", c.system.se_min);
    sr.get("se_max", c.system.se_max);
    sr.get("horizon_slots", c.system.horizon_slots);
    sr.get("n_mc", c.system.n_mc);
    sr.get("se_coherence_slots", c.system.se_coherence_slots);
    sr.finish();
  }
  if (const json* p = r.child("power")) {
    Reader pr(*p, "power");
    pr.get("p_static_w", c.power.p_static_w);
    pr.get("c_bw_w_per_mhz", c.power.c_bw_w_per_mhz);
    pr.get("c_cpu_w_per_ghz", c.power.c_cpu_w_per_ghz);
    pr.finish();
  }
  if (const json* n = r.child("negotiation")) {
    Reader nr(*n, "negotiation");
    nr.get("n_rounds", c.negotiation.n_rounds);
    std::string order(to_string(c.negotiation.turn_order));
    nr.get("turn_order", order);
    c.negotiation.turn_order = parse_turn_order(order);
    nr.get("verify", c.negotiation.verify);
    nr.get("step_bw_mhz", c.negotiation.search.step_bw_mhz);
    nr.get("step_cpu_ghz", c.negotiation.search.step_cpu_ghz);
    nr.get("max_search_iters", c.negotiation.search.max_search_iters);
    nr.get("score_met_reward", c.negotiation.score.met_reward);
    nr.get("score_violation_base", c.negotiation.score.violation_base);
    nr.finish();
  }
  if (const json* s = r.child("slices")) {
    if (!s->is_array() || s->size() != 2) throw ParseError("slices must be an array of two objects");
    for (std::size_t i = 0; i < 2; ++i) read_slice((*s)[i], fmt::format("slices[{}]", i), c.slices[i]);
  }
  if (const json* p = r.child("proposer")) {
    Reader pr(*p, "proposer");
    pr.get("backend", c.proposer.backend);
    pr.get("replay_path", c.proposer.replay_path);
    pr.get("conservative_factor", c.proposer.heuristic.conservative_factor);
    pr.get("aggressive_factor", c.proposer.heuristic.aggressive_factor);
    pr.get("remote_timeout_ms", c.proposer.remote_timeout_ms);
    pr.get("remote_retries", c.proposer.remote_retries);
    pr.finish();
  }
  r.finish();
  c.negotiation.power = c.power;
  c.validate();
  return c;
}

ojson config_to_json(const ExperimentConfig& c) {
  ojson slices = ojson::array();
  for (const auto& s : c.slices) {
    slices.push_back({{"name", s.name},
                      {"sla_ms", s.sla_ms},
                      {"theta_biased", s.theta_biased},
                      {"theta_unbiased", s.theta_unbiased},
                      {"alpha", s.alpha},
                      {"arrival", arrival_json(s.arrival)}});
  }
  return {{"schema_version", kSchemaVersion},
          {"n_trials", c.n_trials},
          {"master_seed", c.master_seed},
          {"strategies", to_string(c.strategies)},
          {"warmup_slots", c.warmup_slots},
          {"eval_slots", c.eval_slots},
          {"output_dir", c.output_dir},
          {"workers", c.workers},
          {"pool", {{"b_total_mhz", c.pool.b_total_mhz}, {"f_total_ghz", c.pool.f_total_ghz}}},
          {"system",
           {{"tau_s", c.system.tau_s},
            {"cpu_rate_mbps_per_ghz", c.system.cpu_rate_mbps_per_ghz},
            {"se_min", c.system.se_min},
            {"se_max", c.system.se_max},
            {"horizon_slots", c.system.horizon_slots},
            {"n_mc", c.system.n_mc},
            {"se_coherence_slots", c.system.se_coherence_slots}}},
          {"power",
           {{"p_static_w", c.power.p_static_w},
            {"c_bw_w_per_mhz", c.power.c_bw_w_per_mhz},
            {"c_cpu_w_per_ghz", c.power.c_cpu_w_per_ghz}}},
          {"negotiation",
           {{"n_rounds", c.negotiation.n_rounds},
            {"turn_order", to_string(c.negotiation.turn_order)},
            {"verify", c.negotiation.verify},
            {"step_bw_mhz", c.negotiation.search.step_bw_mhz},
            {"step_cpu_ghz", c.negotiation.search.step_cpu_ghz},
            {"max_search_iters", c.negotiation.search.max_search_iters},
            {"score_met_reward", c.negotiation.score.met_reward},
            {"score_violation_base", c.negotiation.score.violation_base}}},
          {"slices", slices},
          {"proposer",
           {{"backend", c.proposer.backend},
            {"replay_path", c.proposer.replay_path},
            {"conservative_factor", c.proposer.heuristic.conservative_factor},
            {"aggressive_factor", c.proposer.heuristic.aggressive_factor},
            {"remote_timeout_ms", c.proposer.remote_timeout_ms},
            {"remote_retries", c.proposer.remote_retries}}}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  // Relative replay paths are resolved against the config file.
  if (c.proposer.backend == "replay" && std::filesystem::path(c.proposer.replay_path).is_relative()) {
    const auto candidate = path.parent_path() / c.proposer.replay_path;
    if (std::filesystem::exists(candidate)) c.proposer.replay_path = candidate.string();
  }
  return c;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  return derive_seed(derive_seed(master_seed, "trial"), static_cast<std::uint64_t>(trial));
}

TrialResult run_trial(const ExperimentConfig& config, Strategy strategy, int trial) {
  TrialResult res;
  res.strategy = strategy;
  res.trial = trial;
  res.transcript_file = transcript_name(strategy, trial);
  const std::uint64_t seed = trial_seed(config.master_seed, trial);
  const SystemConstants& consts = config.system;

  std::array<ArrivalProcess, 2> traffic;
  std::array<double, 2> loads{};
  std::array<std::uint64_t, 2> world_seed{};
  for (std::size_t i = 0; i < 2; ++i) {
    SplitMix64 jitter(derive_seed(derive_seed(seed, "jitter"), i));
    traffic[i] = config.slices[i].arrival.jittered(uniform(jitter, -1.0, 1.0));
    loads[i] = traffic[i].mean_rate_mbps;
    world_seed[i] = derive_seed(derive_seed(seed, "world"), i);
  }
  res.baseline = prop_fair_split(config.pool, loads);

  // Warm the world up under the opening split; negotiation happens at t0.
  std::array<QueueState, 2> t0;
  for (std::size_t i = 0; i < 2; ++i) {
    t0[i] = simulate_world(QueueState{}, res.baseline[i], traffic[i], consts, config.warmup_slots,
                           world_seed[i])
                .final_state;
  }

  std::array<std::unique_ptr<TwinHandle>, 2> twins;
  std::array<std::unique_ptr<Proposer>, 2> proposers;
  std::array<Agent, 2> agents;
  for (std::size_t i = 0; i < 2; ++i) {
    twins[i] = std::make_unique<TwinHandle>(config.slices[i].spec(strategy), traffic[i], consts, t0[i]);
    proposers[i] = make_proposer(config.proposer, config.slices[i].name);
    agents[i] = {twins[i].get(), proposers[i].get()};
  }
  NegotiationParams params = config.negotiation;
  params.power = config.power;
  NegotiationOutcome out =
      run_negotiation(agents, config.pool, res.baseline, params, derive_seed(seed, "negotiation"));

  res.status = out.status;
  res.rounds = out.rounds;
  res.final_allocation = out.allocations;
  res.committed = out.committed;
  res.verification = out.verification;
  res.verified = out.verified;
  res.verification_ran = out.verification_ran;
  res.twin_requests = out.twin_requests;
  res.twin_request_bound = out.twin_request_bound;
  res.abort_reason = out.abort_reason;
  res.transcript = out.transcript.to_jsonl();
  if (!res.completed()) return res;

  for (std::size_t i = 0; i < 2; ++i) {
    const WorldTrace trace = simulate_world(t0[i], res.final_allocation[i], traffic[i], consts,
                                            config.eval_slots, world_seed[i]);
    const ArrivalProfile profile(traffic[i], consts);
    res.window_latency_ms[i] = windowed_latencies(trace.backlog_bits, profile.mean_bits(), consts);
    const auto& w = res.window_latency_ms[i];
    res.max_latency_ms[i] = w.empty() ? 0.0 : *std::max_element(w.begin(), w.end());
    res.violation[i] = res.max_latency_ms[i] > config.slices[i].sla_ms;
    res.energy_saving[i] = energy_saving_fraction(res.final_allocation[i], res.baseline[i], config.power);
  }
  return res;
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::vector<Strategy> strategies = config.strategy_list();
  const std::size_t n = static_cast<std::size_t>(config.n_trials);
  const std::size_t total = strategies.size() * n;
  std::vector<TrialResult> results(total);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  const auto worker = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      const Strategy s = strategies[idx / n];
      const int trial = static_cast<int>(idx % n);
      try {
        results[idx] = run_trial(config, s, trial);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        TrialResult failed;
        failed.strategy = s;
        failed.trial = trial;
        failed.transcript_file = transcript_name(s, trial);
        failed.abort_reason = e.what();
        results[idx] = std::move(failed);
      }
    }
  };

  std::size_t workers = config.workers > 0 ? static_cast<std::size_t>(config.workers)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, total);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return results;
}

double pooled_quantile(const std::vector<TrialResult>& results, Strategy strategy,
                       std::size_t slice, double q) {
  std::vector<double> pooled;
  for (const auto& r : results) {
    if (r.strategy != strategy || !r.completed()) continue;
    const auto& w = r.window_latency_ms.at(slice);
    pooled.insert(pooled.end(), w.begin(), w.end());
  }
  if (pooled.empty()) throw EstimatorDomainError("no realised latencies to pool");
  return empirical_var(SampleSet(std::move(pooled)), q);
}

std::vector<SliceSummary> summarize_results(const std::vector<TrialResult>& results,
                                            const ExperimentConfig& config) {
  std::vector<SliceSummary> out;
  for (const Strategy s : config.strategy_list()) {
    for (std::size_t i = 0; i < 2; ++i) {
      SliceSummary sum;
      sum.strategy = s;
      sum.slice = config.slices[i].name;
      std::vector<double> savings;
      for (const auto& r : results) {
        if (r.strategy != s) continue;
        ++sum.trials;
        if (!r.completed()) {
          ++sum.aborted;
          continue;
        }
        ++sum.completed;
        if (r.status == NegotiationStatus::consensus) ++sum.consensus;
        if (r.violation[i]) ++sum.violations;
        if (r.status == NegotiationStatus::consensus && r.verification_ran &&
            !r.verification[i].satisfied) {
          ++sum.verification_failures;
        }
        savings.push_back(r.energy_saving[i]);
      }
      sum.tail_latency_ms = sum.completed > 0
                                ? pooled_quantile(results, s, i, config.slices[i].alpha)
                                : std::numeric_limits<double>::quiet_NaN();
      sum.median_saving = median_of(savings);
      double acc = 0.0;
      for (double v : savings) acc += v;
      sum.mean_saving = savings.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : acc / static_cast<double>(savings.size());
      out.push_back(std::move(sum));
    }
  }
  return out;
}

void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "transcripts", ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!(out << "ok")) throw std::runtime_error("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void emit_outputs(const std::vector<TrialResult>& results, const ExperimentConfig& config,
                  const std::filesystem::path& dir) {
  ensure_writable(dir);
  const auto& names = config.slices;

  std::string trials = header();
  trials += fmt::format(
      "strategy,trial,status,rounds,{0}_bw_mhz,{0}_cpu_ghz,{1}_bw_mhz,{1}_cpu_ghz,"
      "{0}_violation,{1}_violation,{0}_max_ms,{1}_max_ms,{0}_saving,{1}_saving,verified,"
      "twin_requests,transcript\n",
      names[0].name, names[1].name);
  for (const auto& r : results) {
    const auto& f = r.final_allocation;
    trials += fmt::format("{},{},{},{},{},{},{},{},{:d},{:d},{},{},{},{},{:d},{},transcripts/{}\n",
                          to_string(r.strategy), r.trial, to_string(r.status), r.rounds,
                          num(f[0].bandwidth_mhz), num(f[0].cpu_ghz), num(f[1].bandwidth_mhz),
                          num(f[1].cpu_ghz), r.violation[0], r.violation[1], num(r.max_latency_ms[0]),
                          num(r.max_latency_ms[1]), num(r.energy_saving[0]), num(r.energy_saving[1]),
                          r.verified, r.twin_requests, r.transcript_file);
  }
  write_file(dir / "trials.csv", trials);

  std::string latency = header() + "strategy,slice,cdf,latency_ms\n";
  std::string energy = header() + "strategy,slice,cdf,saving\n";
  constexpr std::size_t kLevels = 1000;
  for (const Strategy s : config.strategy_list()) {
    for (std::size_t i = 0; i < 2; ++i) {
      std::vector<double> pooled;
      std::vector<double> savings;
      for (const auto& r : results) {
        if (r.strategy != s || !r.completed()) continue;
        pooled.insert(pooled.end(), r.window_latency_ms[i].begin(), r.window_latency_ms[i].end());
        savings.push_back(r.energy_saving[i]);
      }
      std::sort(pooled.begin(), pooled.end());
      std::sort(savings.begin(), savings.end());
      const std::size_t n = pooled.size();
      for (std::size_t j = 1; n > 0 && j <= kLevels; ++j) {
        const std::size_t idx = (j * n + kLevels - 1) / kLevels - 1;
        latency += fmt::format("{},{},{},{}\n", to_string(s), names[i].name,
                               num(static_cast<double>(j) / kLevels), num(pooled[idx]));
      }
      for (std::size_t k = 0; k < savings.size(); ++k) {
        energy += fmt::format("{},{},{},{}\n", to_string(s), names[i].name,
                              num(static_cast<double>(k + 1) / static_cast<double>(savings.size())),
                              num(savings[k]));
      }
    }
  }
  write_file(dir / "latency_cdf.csv", latency);
  write_file(dir / "energy_cdf.csv", energy);

  std::string summary = header();
  summary +=
      "strategy,slice,trials,completed,aborted,consensus,violations,verification_failures,"
      "tail_quantile,tail_latency_ms,median_saving,mean_saving\n";
  for (const auto& s : summarize_results(results, config)) {
    const double q = s.slice == names[0].name ? names[0].alpha : names[1].alpha;
    summary += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(s.strategy), s.slice,
                           s.trials, s.completed, s.aborted, s.consensus, s.violations,
                           s.verification_failures, q, num(s.tail_latency_ms),
                           num(s.median_saving), num(s.mean_saving));
  }
  write_file(dir / "summary.csv", summary);

  std::string diagnostics = header() + "strategy,trial,status,detail\n";
  for (const auto& r : results) {
    std::string detail;
    if (!r.completed()) {
      detail = r.abort_reason;
    } else if (r.status == NegotiationStatus::consensus && r.verification_ran && !r.verified) {
      detail = "consensus failed fresh-seed verification";
    } else {
      continue;
    }
    std::replace(detail.begin(), detail.end(), ',', ';');
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    diagnostics += fmt::format("{},{},{},{}\n", to_string(r.strategy), r.trial, to_string(r.status), detail);
  }
  write_file(dir / "diagnostics.csv", diagnostics);

  for (const auto& r : results) write_file(dir / "transcripts" / r.transcript_file, r.transcript);
}

}  // namespace slicenego
