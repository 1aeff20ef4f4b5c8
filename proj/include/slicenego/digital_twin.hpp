#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "slicenego/risk_metrics.hpp"

namespace slicenego {

/// Global slot/radio/compute constants. Unit conversions (MHz -> Hz,
/// GHz x Mbit/s-per-GHz -> bit/s) happen only in the two service helpers.
struct SystemConstants {
  double tau_s = 1e-3;
  double cpu_rate_mbps_per_ghz = 10.0;
  double se_min = 5.0;  // bit/s/Hz
  double se_max = 7.0;
  std::size_t horizon_slots = 600;  // Little's-law averaging window T
  std::size_t n_mc = 100000;
  /// Slots over which one spectral-efficiency draw stays in force. Equal to
  /// the horizon by default (one draw per Monte Carlo sample); 1 gives i.i.d.
  /// per-slot draws.
  std::size_t se_coherence_slots = 600;

  void validate() const;

  double edge_service_bits(double cpu_ghz) const noexcept {
    return tau_s * cpu_ghz * cpu_rate_mbps_per_ghz * 1e6;
  }
  double radio_service_bits(double bandwidth_mhz, double se) const noexcept {
    return tau_s * bandwidth_mhz * 1e6 * se;
  }
  double slots_to_ms(double slots) const noexcept { return slots * tau_s * 1e3; }
};

/// Offered traffic of one slice. The per-slot mean follows a periodic profile
/// (1 + A sin(2 pi t / P))^k normalised to a unit mean over one period, so
/// the long-run mean is exactly mean_rate_mbps. k > 1 sharpens the peaks.
struct ArrivalProcess {
  double mean_rate_mbps = 0.0;
  double modulation_amplitude = 0.0;  // A in [0, 1]
  std::size_t modulation_period_slots = 600;
  double burst_exponent = 1.0;  // k >= 1
  double jitter_fraction = 0.1;  // per-trial uniform jitter on the base rate
  double packet_bytes = 0.0;  // > 0: Poisson packet counts in the world model

  void validate() const;
  /// The same process with its base rate scaled by (1 + jitter_fraction * u),
  /// u in [-1, 1].
  ArrivalProcess jittered(double u) const;
};

/// Precomputed one-period table of expected bits per slot.
class ArrivalProfile {
 public:
  ArrivalProfile(const ArrivalProcess& process, const SystemConstants& consts);

  double bits_at(std::size_t slot) const noexcept { return table_[slot % table_.size()]; }
  double mean_bits() const noexcept { return mean_bits_; }
  double peak_bits() const noexcept { return peak_bits_; }

 private:
  std::vector<double> table_;
  double mean_bits_ = 0.0;
  double peak_bits_ = 0.0;
};

struct QueueState {
  double edge_bits = 0.0;
  double ran_bits = 0.0;
  std::size_t slot_index = 0;

  friend bool operator==(const QueueState&, const QueueState&) = default;
};

/// A slice's resource request.
struct Action {
  double bandwidth_mhz = 0.0;
  double cpu_ghz = 0.0;

  friend bool operator==(const Action&, const Action&) = default;
};

struct SlotFlows {
  QueueState next;
  double edge_served_bits = 0.0;  // moved from edge to RAN this slot
  double ran_departed_bits = 0.0;  // transmitted over the air this slot
};

/// One slot of the edge -> RAN pipeline. The edge forwards
/// min(Q_e + arrivals, D_e) bits to the RAN and keeps the remainder; the RAN
/// transmits min(Q_r, D_r) from its previous backlog before the forwarded
/// bits join it. Bits are conserved exactly.
SlotFlows step_queues_detailed(const QueueState& state, const Action& action,
                               double arrivals_bits, double se_bps_per_hz,
                               const SystemConstants& consts);

QueueState step_queues(const QueueState& state, const Action& action, double arrivals_bits,
                       double se_bps_per_hz, const SystemConstants& consts);

/// Little's-law average latency (ms) of a trajectory of horizon_slots states.
double measure_latency(std::span<const QueueState> trajectory,
                       double mean_arrival_bits_per_slot, const SystemConstants& consts);

struct LatencyDistribution {
  SampleSet samples;  // ms
  double compute_latency_ms = 0.0;  // deterministic edge component
  std::vector<double> radio_latency_samples;  // ms, one per sample
  double radio_latency_mean_ms = 0.0;
  TailStats stats;
};

/// Monte Carlo latency prediction over one horizon window starting at `state`.
/// Arrivals follow the forecast's expected profile; each sample draws its own
/// spectral-efficiency path from a substream derived from (seed, sample).
LatencyDistribution predict_distribution(const QueueState& state, const Action& action,
                                         const ArrivalProcess& forecast,
                                         const SystemConstants& consts, std::uint64_t seed,
                                         double alpha);

/// Spectral efficiency in force at an absolute slot for a given world seed.
double world_se(std::uint64_t seed, std::size_t slot, const SystemConstants& consts);

struct WorldTrace {
  std::vector<double> backlog_bits;  // edge + RAN after each slot
  double arrived_bits = 0.0;
  double departed_bits = 0.0;
  QueueState start;
  QueueState final_state;
};

/// Ground-truth rollout of a fixed allocation: fresh spectral-efficiency
/// blocks and (optionally Poisson) arrivals drawn from the seed.
WorldTrace simulate_world(const QueueState& start, const Action& action,
                          const ArrivalProcess& actual, const SystemConstants& consts,
                          std::size_t n_slots, std::uint64_t seed);

/// Sliding-window Little's-law latencies (ms) over a backlog series.
std::vector<double> windowed_latencies(std::span<const double> backlog_bits,
                                       double mean_arrival_bits_per_slot,
                                       const SystemConstants& consts);

}  // namespace slicenego
