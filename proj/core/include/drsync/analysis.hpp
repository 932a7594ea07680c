#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "drsync/workload.hpp"

namespace drsync {

/// Per-direction packet size and overhead statistics.
struct TraceStats {
  std::uint32_t bucket_bytes = 10;
  std::map<std::uint32_t, std::uint64_t> size_histogram;  // bucket low edge -> count
  std::map<std::uint32_t, std::uint64_t> exact_sizes;    // header + payload -> count
  std::uint64_t packet_count = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t header_bytes = 0;
  std::uint64_t ack_packets = 0;
  std::uint64_t ack_bytes = 0;
  double mean_client_bandwidth_bps = 0.0;
  double header_byte_fraction = 0.0;
  double ack_byte_fraction = 0.0;
  double ack_packet_fraction = 0.0;

  /// Fraction of packets whose total size is strictly below `threshold_bytes`.
  double fraction_below(std::uint32_t threshold_bytes) const;
};

/// Throws Errc::empty_input when the trace has no packets in `direction`.
TraceStats compute_stats(const Trace& trace, Direction direction, std::uint32_t bucket_bytes = 10);

struct InterarrivalStats {
  double mean_ms = 0.0;
  double stddev_ms = 0.0;  // population
  double p50_ms = 0.0;
  double p90_ms = 0.0;
  double p99_ms = 0.0;
  std::size_t samples = 0;
};

/// Throws Errc::insufficient_data for fewer than two packets.
InterarrivalStats interarrival_stats(const Trace& trace, std::uint32_t conn_id, Direction direction);
InterarrivalStats interarrival_stats(std::span<const std::int64_t> sorted_times);

struct CountSeries {
  std::int64_t bucket_ms = 100;
  std::vector<double> counts;
};

/// Packet counts per bucket over [0, trace.duration_ms) for one direction.
/// When `conn_id` is set only that connection is counted.
CountSeries count_series(const Trace& trace, Direction direction, std::int64_t bucket_ms,
                         std::optional<std::uint32_t> conn_id = std::nullopt);

/// Lag-k autocorrelation normalized by the full-series mean and variance:
///   r(k) = sum_{t < n-k} (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2
/// Throws Errc::lag_range when lag >= n and Errc::undefined_correlation for a
/// constant series.
double autocorr(const CountSeries& series, std::size_t lag);

/// r(0..max_lag) in one pass over the centred series.
std::vector<double> autocorr_all(std::span<const double> counts, std::size_t max_lag);

struct Periodicity {
  std::size_t lag = 0;
  double strength = 0.0;
};

inline constexpr double kPeriodicityThreshold = 0.3;

/// Scans lags 1..n/2 and returns the strongest autocorrelation if it reaches
/// `threshold`. A constant series has no period.
std::optional<Periodicity> detect_period(const CountSeries& series,
                                         double threshold = kPeriodicityThreshold);

}  // namespace drsync
