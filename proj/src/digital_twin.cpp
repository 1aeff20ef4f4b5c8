#include "slicenego/digital_twin.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "slicenego/errors.hpp"
#include "slicenego/rng.hpp"

namespace slicenego {
namespace {

bool finite_non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

void check_action(const Action& a) {
  if (!finite_non_negative(a.bandwidth_mhz) || !finite_non_negative(a.cpu_ghz)) {
    throw ContractViolation("action components must be finite and non-negative");
  }
}

void check_state(const QueueState& s) {
  if (!finite_non_negative(s.edge_bits) || !finite_non_negative(s.ran_bits)) {
    throw ContractViolation("queue backlogs must be finite and non-negative");
  }
}

std::size_t coherence_slots(const SystemConstants& c) {
  return c.se_coherence_slots == 0 ? c.horizon_slots : c.se_coherence_slots;
}

}  // namespace

void SystemConstants::validate() const {
  if (!(tau_s > 0.0) || !std::isfinite(tau_s)) throw ParameterError("tau_s must be > 0");
  if (!(cpu_rate_mbps_per_ghz > 0.0)) throw ParameterError("cpu_rate_mbps_per_ghz must be > 0");
  if (!(se_min > 0.0) || !(se_min <= se_max) || !std::isfinite(se_max)) {
    throw ParameterError("spectral-efficiency bounds must satisfy 0 < se_min <= se_max");
  }
  if (horizon_slots < 1) throw ParameterError("horizon_slots must be >= 1");
  if (n_mc < 1) throw ParameterError("n_mc must be >= 1");
}

void ArrivalProcess::validate() const {
  if (!finite_non_negative(mean_rate_mbps)) throw ParameterError("mean_rate_mbps must be >= 0");
  if (!(modulation_amplitude >= 0.0 && modulation_amplitude <= 1.0)) {
    throw ParameterError("modulation_amplitude must lie in [0, 1]");
  }
  if (modulation_period_slots < 1) throw ParameterError("modulation_period_slots must be >= 1");
  if (!(burst_exponent >= 1.0) || !std::isfinite(burst_exponent)) {
    throw ParameterError("burst_exponent must be >= 1");
  }
  if (!(jitter_fraction >= 0.0 && jitter_fraction < 1.0)) {
    throw ParameterError("jitter_fraction must lie in [0, 1)");
  }
  if (!finite_non_negative(packet_bytes)) throw ParameterError("packet_bytes must be >= 0");
}

ArrivalProcess ArrivalProcess::jittered(double u) const {
  ArrivalProcess out = *this;
  out.mean_rate_mbps = mean_rate_mbps * (1.0 + jitter_fraction * std::clamp(u, -1.0, 1.0));
  return out;
}

ArrivalProfile::ArrivalProfile(const ArrivalProcess& process, const SystemConstants& consts) {
  process.validate();
  const std::size_t period = process.modulation_period_slots;
  table_.resize(period);
  for (std::size_t t = 0; t < period; ++t) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(period);
    const double base = std::max(0.0, 1.0 + process.modulation_amplitude * std::sin(phase));
    table_[t] = std::pow(base, process.burst_exponent);
  }
  const double shape_mean =
      std::accumulate(table_.begin(), table_.end(), 0.0) / static_cast<double>(period);
  mean_bits_ = process.mean_rate_mbps * 1e6 * consts.tau_s;
  for (double& v : table_) v = shape_mean > 0.0 ? v / shape_mean * mean_bits_ : mean_bits_;
  peak_bits_ = *std::max_element(table_.begin(), table_.end());
}

SlotFlows step_queues_detailed(const QueueState& state, const Action& action,
                               double arrivals_bits, double se_bps_per_hz,
                               const SystemConstants& consts) {
  check_state(state);
  check_action(action);
  if (!finite_non_negative(arrivals_bits)) {
    throw ContractViolation("arrivals must be finite and non-negative");
  }
  if (!(se_bps_per_hz >= consts.se_min && se_bps_per_hz <= consts.se_max)) {
    throw ContractViolation("spectral efficiency outside [se_min, se_max]");
  }
  const double edge_capacity = consts.edge_service_bits(action.cpu_ghz);
  const double radio_capacity = consts.radio_service_bits(action.bandwidth_mhz, se_bps_per_hz);

  const double edge_content = state.edge_bits + arrivals_bits;
  const double forwarded = std::min(edge_content, edge_capacity);
  const double transmitted = std::min(state.ran_bits, radio_capacity);

  SlotFlows out;
  out.next.edge_bits = edge_content - forwarded;
  out.next.ran_bits = (state.ran_bits - transmitted) + forwarded;
  out.next.slot_index = state.slot_index + 1;
  out.edge_served_bits = forwarded;
  out.ran_departed_bits = transmitted;
  return out;
}

QueueState step_queues(const QueueState& state, const Action& action, double arrivals_bits,
                       double se_bps_per_hz, const SystemConstants& consts) {
  return step_queues_detailed(state, action, arrivals_bits, se_bps_per_hz, consts).next;
}

double measure_latency(std::span<const QueueState> trajectory,
                       double mean_arrival_bits_per_slot, const SystemConstants& consts) {
  if (trajectory.size() != consts.horizon_slots) {
    throw ContractViolation("trajectory length must equal horizon_slots (" +
                            std::to_string(consts.horizon_slots) + "), got " +
                            std::to_string(trajectory.size()));
  }
  if (!(mean_arrival_bits_per_slot > 0.0)) {
    throw UndefinedLatencyError("Little's-law latency needs a positive mean arrival rate");
  }
  double backlog = 0.0;
  for (const auto& s : trajectory) backlog += s.edge_bits + s.ran_bits;
  const double slots =
      backlog / (mean_arrival_bits_per_slot * static_cast<double>(trajectory.size()));
  return consts.slots_to_ms(slots);
}

LatencyDistribution predict_distribution(const QueueState& state, const Action& action,
                                         const ArrivalProcess& forecast,
                                         const SystemConstants& consts, std::uint64_t seed,
                                         double alpha) {
  consts.validate();
  check_state(state);
  check_action(action);
  const ArrivalProfile profile(forecast, consts);
  if (!(profile.mean_bits() > 0.0)) {
    throw UndefinedLatencyError("forecast has a zero mean arrival rate");
  }

  const std::size_t horizon = consts.horizon_slots;
  const std::size_t n = consts.n_mc;
  const double norm = consts.slots_to_ms(1.0) / (profile.mean_bits() * static_cast<double>(horizon));

  // The edge queue does not see the radio, so its path is shared by all samples.
  std::vector<double> forwarded(horizon);
  const double edge_capacity = consts.edge_service_bits(action.cpu_ghz);
  double edge = state.edge_bits;
  double edge_total = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double content = edge + profile.bits_at(state.slot_index + t);
    forwarded[t] = std::min(content, edge_capacity);
    edge = content - forwarded[t];
    edge_total += edge;
  }
  const double compute_ms = edge_total * norm;

  // Spectral efficiency is redrawn at every coherence-block boundary
  // (aligned to absolute slot numbers).
  const std::size_t coherence = coherence_slots(consts);
  std::vector<SplitMix64> streams;
  streams.reserve(n);
  for (std::size_t k = 0; k < n; ++k) streams.emplace_back(derive_seed(seed, k));

  std::vector<double> ran_total(n, 0.0);
  const double bw_bits = consts.tau_s * action.bandwidth_mhz * 1e6;

  // Samples are processed in small tiles so the per-sample state stays in
  // cache while the tile is rolled through the whole horizon.
  constexpr std::size_t kTile = 256;
  std::array<double, kTile> ran{};
  std::array<double, kTile> total{};
  std::array<double, kTile> capacity{};
  for (std::size_t k0 = 0; k0 < n; k0 += kTile) {
    const std::size_t m = std::min(kTile, n - k0);
    ran.fill(state.ran_bits);
    total.fill(0.0);
    std::size_t t = 0;
    while (t < horizon) {
      const std::size_t abs_slot = state.slot_index + t;
      const std::size_t block_end = std::min(horizon, t + (coherence - abs_slot % coherence));
      for (std::size_t j = 0; j < m; ++j) {
        capacity[j] = bw_bits * uniform(streams[k0 + j], consts.se_min, consts.se_max);
      }
      for (; t < block_end; ++t) {
        const double inflow = forwarded[t];
        for (std::size_t j = 0; j < kTile; ++j) {
          const double q = std::max(0.0, ran[j] - capacity[j]) + inflow;
          ran[j] = q;
          total[j] += q;
        }
      }
    }
    std::copy_n(total.begin(), m, ran_total.begin() + static_cast<std::ptrdiff_t>(k0));
  }

  LatencyDistribution out;
  out.compute_latency_ms = compute_ms;
  out.radio_latency_samples.resize(n);
  std::vector<double> totals(n);
  double radio_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.radio_latency_samples[k] = ran_total[k] * norm;
    totals[k] = compute_ms + out.radio_latency_samples[k];
    radio_sum += out.radio_latency_samples[k];
  }
  out.radio_latency_mean_ms = radio_sum / static_cast<double>(n);
  out.samples = SampleSet(std::move(totals));
  out.stats = summarize(out.samples, alpha);
  return out;
}

double world_se(std::uint64_t seed, std::size_t slot, const SystemConstants& consts) {
  SplitMix64 gen(derive_seed(seed, static_cast<std::uint64_t>(slot / coherence_slots(consts))));
  return uniform(gen, consts.se_min, consts.se_max);
}

WorldTrace simulate_world(const QueueState& start, const Action& action,
                          const ArrivalProcess& actual, const SystemConstants& consts,
                          std::size_t n_slots, std::uint64_t seed) {
  consts.validate();
  const ArrivalProfile profile(actual, consts);
  const std::uint64_t se_seed = derive_seed(seed, "se");
  SplitMix64 arrival_gen(derive_seed(seed, "arrivals"));
  const double packet_bits = actual.packet_bytes * 8.0;

  WorldTrace trace;
  trace.start = start;
  trace.backlog_bits.reserve(n_slots);
  QueueState state = start;
  for (std::size_t i = 0; i < n_slots; ++i) {
    double arrivals = profile.bits_at(state.slot_index);
    if (packet_bits > 0.0) {
      std::poisson_distribution<long long> packets(arrivals / packet_bits);
      arrivals = static_cast<double>(packets(arrival_gen)) * packet_bits;
    }
    const double se = world_se(se_seed, state.slot_index, consts);
    const SlotFlows flows = step_queues_detailed(state, action, arrivals, se, consts);
    trace.arrived_bits += arrivals;
    trace.departed_bits += flows.ran_departed_bits;
    state = flows.next;
    trace.backlog_bits.push_back(state.edge_bits + state.ran_bits);
  }
  trace.final_state = state;
  return trace;
}

std::vector<double> windowed_latencies(std::span<const double> backlog_bits,
                                       double mean_arrival_bits_per_slot,
                                       const SystemConstants& consts) {
  if (!(mean_arrival_bits_per_slot > 0.0)) {
    throw UndefinedLatencyError("Little's-law latency needs a positive mean arrival rate");
  }
  const std::size_t window = consts.horizon_slots;
  if (backlog_bits.size() < window) return {};
  std::vector<double> prefix(backlog_bits.size() + 1, 0.0);
  std::partial_sum(backlog_bits.begin(), backlog_bits.end(), prefix.begin() + 1);
  const double norm =
      consts.slots_to_ms(1.0) / (mean_arrival_bits_per_slot * static_cast<double>(window));
  std::vector<double> out;
  out.reserve(backlog_bits.size() - window + 1);
  for (std::size_t w = 0; w + window <= backlog_bits.size(); ++w) {
    out.push_back((prefix[w + window] - prefix[w]) * norm);
  }
  return out;
}

}  // namespace slicenego
