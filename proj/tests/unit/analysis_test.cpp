#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "drsync/analysis.hpp"
#include "drsync/error.hpp"
#include "drsync/rng.hpp"

namespace drsync {
namespace {

// Independent estimator: recompute mean and variance from scratch for every
// lag, no shared centring, long double accumulation.
double naive_autocorr(const std::vector<double>& x, std::size_t lag) {
  const std::size_t n = x.size();
  long double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  long double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  long double cov = 0;
  for (std::size_t t = 0; t + lag < n; ++t) cov += (x[t] - mean) * (x[t + lag] - mean);
  return static_cast<double>(cov / var);
}

std::size_t naive_argmax_lag(const std::vector<double>& x, double* best_value) {
  std::size_t best = 1;
  *best_value = naive_autocorr(x, 1);
  for (std::size_t k = 2; k <= x.size() / 2; ++k) {
    const double r = naive_autocorr(x, k);
    if (r > *best_value) {
      best = k;
      *best_value = r;
    }
  }
  return best;
}

Trace single_packet_trace() {
  Trace t;
  t.duration_ms = 1000;
  t.n_clients = 1;
  t.records.push_back({0, 0, Direction::ClientToServer, 60, 40, false});
  return t;
}

TEST(ComputeStats, SinglePacketHandArithmetic) {
  const auto s = compute_stats(single_packet_trace(), Direction::ClientToServer);
  EXPECT_DOUBLE_EQ(s.mean_client_bandwidth_bps, 800.0);  // 100 bytes * 8 / 1 s / 1 client
  EXPECT_DOUBLE_EQ(s.header_byte_fraction, 0.4);
  EXPECT_EQ(s.fraction_below(101), 1.0);
  EXPECT_EQ(s.fraction_below(100), 0.0);
}

TEST(ComputeStats, AllAckTraceIsAllHeader) {
  Trace t;
  t.duration_ms = 1000;
  t.n_clients = 2;
  for (int i = 0; i < 10; ++i) t.records.push_back({i, static_cast<std::uint32_t>(i % 2), Direction::ClientToServer, 0, 40, true});
  const auto s = compute_stats(t, Direction::ClientToServer);
  EXPECT_EQ(s.header_byte_fraction, 1.0);
  EXPECT_EQ(s.ack_byte_fraction, 1.0);
  EXPECT_EQ(s.ack_packet_fraction, 1.0);
}

TEST(ComputeStats, EmptyDirectionIsAnError) {
  try {
    compute_stats(single_packet_trace(), Direction::ServerToClient);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_input);
  }
}

TEST(ComputeStats, HistogramSumsToPacketCountAndIgnoresOrder) {
  auto trace = generate_trace(preset("mmorpg"), 5, 30000, 4);
  const auto a = compute_stats(trace, Direction::ClientToServer);
  std::uint64_t total = 0;
  for (const auto& [low, count] : a.size_histogram) total += count;
  EXPECT_EQ(total, a.packet_count);
  std::mt19937 shuffle(1);
  std::shuffle(trace.records.begin(), trace.records.end(), shuffle);
  const auto b = compute_stats(trace, Direction::ClientToServer);
  EXPECT_EQ(a.total_bytes, b.total_bytes);
  EXPECT_EQ(a.size_histogram, b.size_histogram);
  EXPECT_EQ(a.header_byte_fraction, b.header_byte_fraction);
  EXPECT_EQ(a.mean_client_bandwidth_bps, b.mean_client_bandwidth_bps);
}

TEST(Interarrival, ConstantSpacing) {
  std::vector<std::int64_t> t{0, 100, 200, 300};
  const auto s = interarrival_stats(t);
  EXPECT_DOUBLE_EQ(s.mean_ms, 100.0);
  EXPECT_DOUBLE_EQ(s.stddev_ms, 0.0);
}

TEST(Interarrival, UnevenSpacing) {
  std::vector<std::int64_t> t{0, 100, 300};
  EXPECT_DOUBLE_EQ(interarrival_stats(t).mean_ms, 150.0);  // mean of {100, 200}
}

TEST(Interarrival, SinglePacketIsInsufficient) {
  try {
    interarrival_stats(single_packet_trace(), 0, Direction::ClientToServer);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::insufficient_data);
  }
}

TEST(Autocorr, LagZeroIsOne) {
  CountSeries s{100, {1, 5, 2, 8, 3}};
  EXPECT_DOUBLE_EQ(autocorr(s, 0), 1.0);
}

TEST(Autocorr, AlternatingSeries) {
  CountSeries s{100, {}};
  for (int i = 0; i < 64; ++i) s.counts.push_back(i % 2 == 0 ? 1.0 : -1.0);
  // Oracle: -(n-1)/n for the full-series normalization.
  EXPECT_NEAR(autocorr(s, 1), -1.0, 0.05);
  EXPECT_NEAR(autocorr(s, 1), naive_autocorr(s.counts, 1), 1e-12);
  EXPECT_DOUBLE_EQ(autocorr(s, 1), -63.0 / 64.0);
}

TEST(Autocorr, MatchesBruteForceOnRandomSeries) {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(8, 512));
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(rng.uniform_int(0, 30));
    const auto fast = autocorr_all(x, n / 2);
    for (std::size_t k = 0; k <= n / 2; ++k) EXPECT_NEAR(fast[k], naive_autocorr(x, k), 1e-9);
  }
}

TEST(Autocorr, TimeReversalSymmetry) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    CountSeries s{100, {}};
    for (int i = 0; i < 200; ++i) s.counts.push_back(static_cast<double>(rng.uniform_int(0, 9)));
    CountSeries r = s;
    std::reverse(r.counts.begin(), r.counts.end());
    for (std::size_t lag : {1, 2, 7, 50}) EXPECT_NEAR(autocorr(s, lag), autocorr(r, lag), 1e-9);
  }
}

TEST(Autocorr, ValuesStayInUnitInterval) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(100);
    for (auto& v : x) v = rng.uniform(0, 10);
    for (double r : autocorr_all(x, 99)) {
      EXPECT_GE(r, -1.0);
      EXPECT_LE(r, 1.0);
    }
  }
}

TEST(Autocorr, Errors) {
  CountSeries constant{100, std::vector<double>(20, 3.0)};
  try {
    autocorr(constant, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::undefined_correlation);
  }
  CountSeries s{100, {1, 2, 3}};
  try {
    autocorr(s, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::lag_range);
  }
}

TEST(DetectPeriod, ImpulseTrain) {
  CountSeries s{100, std::vector<double>(64, 0.0)};
  for (std::size_t i = 0; i < s.counts.size(); i += 4) s.counts[i] = 1.0;
  double oracle_value = 0;
  const std::size_t oracle_lag = naive_argmax_lag(s.counts, &oracle_value);
  ASSERT_EQ(oracle_lag, 4u);
  const auto p = detect_period(s);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->lag, 4u);
  EXPECT_NEAR(p->strength, oracle_value, 1e-12);
}

TEST(DetectPeriod, ConstantSeriesHasNone) {
  EXPECT_FALSE(detect_period(CountSeries{100, std::vector<double>(32, 7.0)}));
}

TEST(DetectPeriod, UniformNoiseHasNone) {
  Rng rng(77);
  CountSeries s{100, {}};
  for (int i = 0; i < 256; ++i) s.counts.push_back(rng.uniform01());
  double oracle_value = 0;
  naive_argmax_lag(s.counts, &oracle_value);
  ASSERT_LT(oracle_value, kPeriodicityThreshold);
  EXPECT_FALSE(detect_period(s));
}

TEST(DetectPeriod, TooShortIsAnError) {
  EXPECT_THROW(detect_period(CountSeries{100, {1, 0, 1, 0, 1}}), Error);
}

TEST(DetectPeriod, PeriodicWorkloadRevealsTick) {
  auto p = preset("mmorpg");
  p.burst.p_enter = 0.0;
  p.global_event.period_ms = 0;
  const auto trace = generate_trace(p, 50, 120000, 6);
  const auto series = count_series(trace, Direction::ClientToServer, 100);
  const auto period = detect_period(series);
  ASSERT_TRUE(period);
  EXPECT_EQ(static_cast<std::int64_t>(period->lag) * series.bucket_ms, p.tick_period_ms);
}

TEST(CountSeries, BucketsCoverDuration) {
  Trace t;
  t.duration_ms = 1000;
  t.n_clients = 1;
  for (std::int64_t ms : {0, 50, 99, 100, 950}) t.records.push_back({ms, 0, Direction::ClientToServer, 1, 40, false});
  const auto s = count_series(t, Direction::ClientToServer, 100);
  ASSERT_EQ(s.counts.size(), 10u);
  EXPECT_EQ(s.counts[0], 3.0);
  EXPECT_EQ(s.counts[1], 1.0);
  EXPECT_EQ(s.counts[9], 1.0);
}

}  // namespace
}  // namespace drsync
