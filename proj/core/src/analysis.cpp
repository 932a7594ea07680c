#include "drsync/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drsync/error.hpp"
#include "drsync/protocol.hpp"

namespace drsync {

double TraceStats::fraction_below(std::uint32_t threshold_bytes) const {
  if (packet_count == 0) return 0.0;
  std::uint64_t below = 0;
  for (auto it = exact_sizes.begin(); it != exact_sizes.end() && it->first < threshold_bytes; ++it) {
    below += it->second;
  }
  return static_cast<double>(below) / static_cast<double>(packet_count);
}

TraceStats compute_stats(const Trace& trace, Direction direction, std::uint32_t bucket_bytes) {
  if (bucket_bytes == 0) throw Error(Errc::input, "compute_stats: bucket_bytes must be positive");
  TraceStats s;
  s.bucket_bytes = bucket_bytes;
  for (const auto& r : trace.records) {
    if (r.direction != direction) continue;
    const std::uint32_t size = r.total_bytes();
    ++s.packet_count;
    s.total_bytes += size;
    s.header_bytes += r.header_bytes;
    ++s.exact_sizes[size];
    ++s.size_histogram[size / bucket_bytes * bucket_bytes];
    if (r.is_ack) {
      ++s.ack_packets;
      s.ack_bytes += size;
    }
  }
  if (s.packet_count == 0) {
    throw Error(Errc::empty_input, "compute_stats: no " + std::string(to_string(direction)) + " packets");
  }
  if (trace.duration_ms <= 0 || trace.n_clients == 0) {
    throw Error(Errc::input, "compute_stats: trace needs a positive duration and client count");
  }
  const double seconds = static_cast<double>(trace.duration_ms) / 1000.0;
  s.mean_client_bandwidth_bps =
      static_cast<double>(s.total_bytes) * 8.0 / seconds / static_cast<double>(trace.n_clients);
  const auto total = static_cast<double>(s.total_bytes);
  s.header_byte_fraction = total > 0 ? static_cast<double>(s.header_bytes) / total : 0.0;
  s.ack_byte_fraction = total > 0 ? static_cast<double>(s.ack_bytes) / total : 0.0;
  s.ack_packet_fraction = static_cast<double>(s.ack_packets) / static_cast<double>(s.packet_count);
  return s;
}

InterarrivalStats interarrival_stats(std::span<const std::int64_t> times) {
  if (times.size() < 2) {
    throw Error(Errc::insufficient_data, "interarrival_stats: need at least 2 packets, got " +
                                             std::to_string(times.size()));
  }
  std::vector<double> gaps;
  gaps.reserve(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) gaps.push_back(static_cast<double>(times[i] - times[i - 1]));
  InterarrivalStats s;
  s.samples = gaps.size();
  double sum = 0.0;
  for (double g : gaps) sum += g;
  s.mean_ms = sum / static_cast<double>(gaps.size());
  double sq = 0.0;
  for (double g : gaps) sq += (g - s.mean_ms) * (g - s.mean_ms);
  s.stddev_ms = std::sqrt(sq / static_cast<double>(gaps.size()));
  s.p50_ms = nearest_rank_percentile(gaps, 0.50);
  s.p90_ms = nearest_rank_percentile(gaps, 0.90);
  s.p99_ms = nearest_rank_percentile(std::move(gaps), 0.99);
  return s;
}

InterarrivalStats interarrival_stats(const Trace& trace, std::uint32_t conn_id, Direction direction) {
  std::vector<std::int64_t> times;
  for (const auto& r : trace.records) {
    if (r.conn_id == conn_id && r.direction == direction) times.push_back(r.t_ms);
  }
  std::sort(times.begin(), times.end());
  return interarrival_stats(times);
}

CountSeries count_series(const Trace& trace, Direction direction, std::int64_t bucket_ms,
                         std::optional<std::uint32_t> conn_id) {
  if (bucket_ms < 1) throw Error(Errc::input, "count_series: bucket_ms must be >= 1");
  CountSeries series;
  series.bucket_ms = bucket_ms;
  const std::int64_t buckets = (trace.duration_ms + bucket_ms - 1) / bucket_ms;
  series.counts.assign(static_cast<std::size_t>(std::max<std::int64_t>(buckets, 0)), 0.0);
  for (const auto& r : trace.records) {
    if (r.direction != direction || (conn_id && r.conn_id != *conn_id)) continue;
    if (r.t_ms < 0 || r.t_ms >= trace.duration_ms) continue;
    series.counts[static_cast<std::size_t>(r.t_ms / bucket_ms)] += 1.0;
  }
  return series;
}

namespace {

bool is_constant(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
}

}  // namespace

std::vector<double> autocorr_all(std::span<const double> counts, std::size_t max_lag) {
  const std::size_t n = counts.size();
  if (max_lag >= n) {
    throw Error(Errc::lag_range, "autocorr: lag " + std::to_string(max_lag) + " >= series length " +
                                     std::to_string(n));
  }
  if (is_constant(counts)) throw Error(Errc::undefined_correlation, "autocorr: series has zero variance");

  double mean = 0.0;
  for (double x : counts) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> centred(n);
  double denom = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    centred[t] = counts[t] - mean;
    denom += centred[t] * centred[t];
  }
  std::vector<double> r(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) num += centred[t] * centred[t + k];
    r[k] = num / denom;
  }
  return r;
}

double autocorr(const CountSeries& series, std::size_t lag) {
  return autocorr_all(series.counts, lag).back();
}

std::optional<Periodicity> detect_period(const CountSeries& series, double threshold) {
  const std::size_t n = series.counts.size();
  if (n < 8) {
    throw Error(Errc::insufficient_data, "detect_period: need at least 8 buckets, got " + std::to_string(n));
  }
  if (is_constant(series.counts)) return std::nullopt;
  const auto r = autocorr_all(series.counts, n / 2);
  std::optional<Periodicity> best;
  for (std::size_t k = 1; k < r.size(); ++k) {
    if (!best || r[k] > best->strength) best = Periodicity{k, r[k]};
  }
  if (best && best->strength >= threshold) return best;
  return std::nullopt;
}

}  // namespace drsync
