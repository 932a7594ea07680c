#include <gtest/gtest.h>

#include <sstream>

#include "drsync/analysis.hpp"
#include "drsync/error.hpp"
#include "drsync/workload.hpp"

namespace drsync {
namespace {

WorkloadProfile periodic_profile() {
  auto p = preset("mmorpg");
  p.burst.p_enter = 0.0;
  p.global_event.period_ms = 0;
  return p;
}

TEST(Preset, MmorpgUsesFortyByteHeaders) { EXPECT_EQ(preset("mmorpg").header_bytes, 40u); }

TEST(Preset, KnownPresetsAreValid) {
  EXPECT_TRUE(validate(preset("mmorpg")).empty());
  EXPECT_TRUE(validate(preset("fps")).empty());
}

TEST(Preset, UnknownNameIsLookupError) {
  try {
    preset("unknown");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::lookup);
  }
}

TEST(GenerateTrace, ZeroClientsIsEmpty) { EXPECT_TRUE(generate_trace(preset("mmorpg"), 0, 10000, 1).records.empty()); }

TEST(GenerateTrace, DeterministicUnderSeed) {
  const auto a = generate_trace(preset("mmorpg"), 10, 60000, 42);
  const auto b = generate_trace(preset("mmorpg"), 10, 60000, 42);
  const auto c = generate_trace(preset("mmorpg"), 10, 60000, 43);
  EXPECT_EQ(a.records, b.records);
  EXPECT_NE(a.records, c.records);
}

TEST(GenerateTrace, SortedAndWellFormed) {
  const auto trace = generate_trace(preset("mmorpg"), 20, 60000, 3);
  ASSERT_FALSE(trace.records.empty());
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (i > 0) EXPECT_LE(trace.records[i - 1].t_ms, r.t_ms);
    EXPECT_GE(r.t_ms, 0);
    EXPECT_LT(r.t_ms, 60000);
    EXPECT_LT(r.conn_id, 20u);
    if (r.is_ack) EXPECT_EQ(r.payload_bytes, 0u);
  }
}

TEST(GenerateTrace, PeriodicWhenBurstsAndEventsOff) {
  const auto p = periodic_profile();
  const auto trace = generate_trace(p, 5, 30000, 9);
  std::vector<std::vector<std::int64_t>> times(5);
  for (const auto& r : trace.records) {
    if (r.direction == Direction::ClientToServer && !r.is_ack) times[r.conn_id].push_back(r.t_ms);
  }
  for (const auto& t : times) {
    ASSERT_EQ(t.size(), static_cast<std::size_t>(30000 / p.tick_period_ms));
    for (std::size_t k = 0; k < t.size(); ++k) EXPECT_EQ(t[k], static_cast<std::int64_t>(k) * p.tick_period_ms);
  }
}

TEST(GenerateTrace, GlobalEventsRaiseEventPeriodAutocorrelation) {
  auto with_events = periodic_profile();
  with_events.burst = preset("mmorpg").burst;
  with_events.global_event = {10000, 0.8};
  auto without_events = with_events;
  without_events.global_event.period_ms = 0;
  const std::size_t lag = static_cast<std::size_t>(with_events.global_event.period_ms / with_events.tick_period_ms);
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto a = count_series(generate_trace(with_events, 50, 300000, seed), Direction::ClientToServer,
                                with_events.tick_period_ms);
    const auto b = count_series(generate_trace(without_events, 50, 300000, seed), Direction::ClientToServer,
                                with_events.tick_period_ms);
    EXPECT_GT(autocorr(a, lag), autocorr(b, lag)) << "seed " << seed;
  }
}

TEST(GenerateTrace, RejectsShortDurationAndInvalidProfile) {
  EXPECT_THROW(generate_trace(preset("mmorpg"), 1, 10, 1), Error);
  auto bad = preset("mmorpg");
  bad.burst.p_enter = 1.5;
  bad.ack_every_n = 0;
  try {
    generate_trace(bad, 1, 10000, 1);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.violations().size(), 2u);
  }
}

TEST(ProfileJson, PresetsSurviveADumpAndLoad) {
  for (const char* name : {"mmorpg", "fps"}) {
    const auto p = preset(name);
    const auto q = profile_from_json(profile_to_json(p));
    EXPECT_EQ(q.name, p.name);
    EXPECT_EQ(q.payload.body, p.payload.body);
    EXPECT_EQ(q.tick_period_ms, p.tick_period_ms);
    EXPECT_EQ(generate_trace(p, 3, 20000, 1).records, generate_trace(q, 3, 20000, 1).records);
  }
}

TEST(ProfileJson, UnknownKeysAndBadValuesAreAllReported) {
  const std::string text = R"({"tick_period_ms": 0, "burst": {"p_enter": 2, "typo": 1}, "extra": true})";
  try {
    profile_from_json(text);
    FAIL();
  } catch (const ValidationError& e) {
    std::string all;
    for (const auto& v : e.violations()) all += v + "\n";
    EXPECT_NE(all.find("extra: unknown key"), std::string::npos) << all;
    EXPECT_NE(all.find("typo: unknown key"), std::string::npos) << all;
    EXPECT_NE(all.find("tick_period_ms"), std::string::npos) << all;
    EXPECT_NE(all.find("p_enter"), std::string::npos) << all;
  }
}

TEST(TraceCsv, RoundTripKeepsRecords) {
  const auto trace = generate_trace(preset("mmorpg"), 4, 20000, 12);
  std::stringstream buf;
  write_trace_csv(buf, trace.records);
  const auto loaded = read_trace_csv(buf);
  EXPECT_EQ(loaded.records, trace.records);
  EXPECT_EQ(loaded.n_clients, 4u);
}

TEST(TraceCsv, RejectsAckWithPayloadAndUnsortedRows) {
  std::istringstream ack("t_ms,conn_id,direction,payload_bytes,header_bytes,is_ack\n0,1,c2s,10,40,1\n");
  EXPECT_THROW(read_trace_csv(ack), Error);
  std::istringstream unsorted("t_ms,conn_id,direction,payload_bytes,header_bytes,is_ack\n5,1,c2s,0,40,1\n1,1,c2s,0,40,1\n");
  EXPECT_THROW(read_trace_csv(unsorted), Error);
}

}  // namespace
}  // namespace drsync
