#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drsync/net_sim.hpp"
#include "drsync/protocol.hpp"
#include "drsync/qon.hpp"
#include "drsync/trajectory.hpp"

namespace drsync {

enum class TransportKind { ReliableOrdered, UnreliableDR };

std::string_view to_string(TransportKind kind);

/// One end-to-end experiment. The channel seed and the built-in trajectory
/// seed are derived from `seed`, so a single number reproduces a run.
struct ScenarioConfig {
  std::optional<std::filesystem::path> trajectory_file;
  TrajectoryGeneratorParams trajectory;
  ProtocolConfig protocol;
  ChannelConfig channel;  // channel.seed is overwritten from `seed`
  TransportKind transport = TransportKind::UnreliableDR;
  std::int64_t rto_ms = 200;  // used by the reliable transport (and by compare)
  DejitterConfig dejitter;
  std::int64_t duration_ms = 60000;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;  // empty: nothing is written
};

inline constexpr std::uint32_t kDrPayloadBytes = 60;  // entity, seq, t_sent, position, velocity
inline constexpr std::uint32_t kDrHeaderBytes = 40;

std::vector<std::string> validate(const ScenarioConfig& cfg);

/// Parses the JSON config document. Unknown keys and every invariant
/// violation are reported together in one ValidationError. Relative
/// trajectory paths resolve against `base_dir`.
ScenarioConfig scenario_from_json(const std::string& text,
                                  const std::filesystem::path& base_dir = {});
std::string scenario_to_json(const ScenarioConfig& cfg);

ChannelConfig effective_channel(const ScenarioConfig& cfg);
TransportMode transport_mode(const ScenarioConfig& cfg);

struct RunSummary {
  TransportKind transport = TransportKind::UnreliableDR;
  std::uint64_t seed = 0;
  double error_mean = 0.0;
  double error_max = 0.0;
  double error_p95 = 0.0;
  std::size_t error_samples = 0;
  std::size_t warmup_ticks = 0;
  std::uint64_t dr_sends = 0;
  std::uint64_t packets_sent = 0;  // including retransmissions
  std::uint64_t bytes_sent = 0;
  TransportCounts transport_counts;
  SessionMetrics session;
  RiskAssessment risk;
  double wall_clock_ms = 0.0;  // not serialized
};

struct RunResult {
  RunSummary summary;
  std::vector<TruthSample> truth;
  std::vector<DRVector> sent;
  std::vector<DeliveryEvent> deliveries;
  std::vector<RenderedSample> rendered;
  ExportErrorReport report;
};

/// Session quality as a player would see it over this run: RTT is twice
/// the base latency plus the mean one-way jitter of arrived packets.
SessionMetrics session_metrics(const ChannelConfig& channel,
                               const std::vector<DeliveryEvent>& events,
                               std::int64_t duration_ms);

/// Connectivity counts as recoverable when loss is below 0.5 and some
/// packet arrived during the last 30 s of the run.
bool connectivity_recoverable(const std::vector<DeliveryEvent>& events, double loss_rate,
                              std::int64_t duration_ms);

/// Throws ValidationError for an invalid config. Writes truth.csv,
/// dr_sends.csv, deliveries.csv, export_error.csv and summary.json when
/// output_dir is set.
RunResult run_simulation(const ScenarioConfig& cfg);

struct CompareRow {
  std::uint64_t seed = 0;
  RunSummary reliable;
  RunSummary unreliable;
  double difference() const { return reliable.error_mean - unreliable.error_mean; }
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double mean_difference = 0.0;
  std::size_t unreliable_wins = 0;
};

/// Runs both transports per seed under identical channels. Outputs go to
/// <out>/seed_<s>/{reliable,unreliable}/ plus compare.csv and
/// compare_summary.json. Needs at least two seeds.
CompareResult run_compare(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds);

std::string summary_to_json(const RunSummary& summary);

}  // namespace drsync
