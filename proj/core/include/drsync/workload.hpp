#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace drsync {

/// Client payload sizes: a discrete body plus a uniform tail of large
/// packets. Body weights plus tail_prob sum to 1.
struct PayloadSizeDist {
  std::vector<std::pair<std::uint32_t, double>> body;  // (payload bytes, probability)
  double tail_prob = 0.0;
  std::uint32_t tail_min = 0;
  std::uint32_t tail_max = 0;
};

/// Two-state action model. In the normal state a client sends one data
/// packet per tick; in the burst state it sends burst_rate_multiplier packets
/// per tick on average. p_enter = 0 disables bursts.
struct BurstModel {
  double p_enter = 0.0;
  double p_exit = 1.0;
  double burst_rate_multiplier = 1.0;
};

/// Every period_ms each client independently joins the event with
/// probability `participation` and sends one extra packet on that tick.
/// period_ms = 0 disables events.
struct GlobalEventModel {
  std::int64_t period_ms = 0;
  double participation = 0.0;
};

/// Server-to-client traffic mirrors the client's per-tick send count scaled
/// by a "nearby characters" factor redrawn uniformly every epoch_ms.
struct ServerMirror {
  std::int64_t epoch_ms = 10000;
  double nearby_min = 1.0;
  double nearby_max = 1.0;
};

struct WorkloadProfile {
  std::string name;
  std::int64_t tick_period_ms = 200;
  PayloadSizeDist payload;
  BurstModel burst;
  std::uint32_t header_bytes = 40;
  std::uint32_t ack_every_n = 2;
  GlobalEventModel global_event;
  ServerMirror server;
};

/// Empty when the profile is valid; otherwise one message per violated field.
std::vector<std::string> validate(const WorkloadProfile& profile);

/// "mmorpg" or "fps"; anything else throws Errc::lookup.
WorkloadProfile preset(std::string_view name);

enum class Direction { ClientToServer, ServerToClient };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);

struct TraceRecord {
  std::int64_t t_ms = 0;
  std::uint32_t conn_id = 0;
  Direction direction = Direction::ClientToServer;
  std::uint32_t payload_bytes = 0;
  std::uint32_t header_bytes = 0;
  bool is_ack = false;

  std::uint32_t total_bytes() const { return payload_bytes + header_bytes; }
  bool operator==(const TraceRecord&) const = default;
};

struct Trace {
  std::vector<TraceRecord> records;  // sorted by t_ms
  std::int64_t duration_ms = 0;
  std::uint32_t n_clients = 0;
};

Trace generate_trace(const WorkloadProfile& profile, std::uint32_t n_clients,
                     std::int64_t duration_ms, std::uint64_t seed);

/// CSV: `t_ms,conn_id,direction,payload_bytes,header_bytes,is_ack`.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records);
/// Duration defaults to last t_ms + 1 and n_clients to the number of
/// distinct connection ids.
Trace read_trace_csv(std::istream& in);

std::string profile_to_json(const WorkloadProfile& profile);
/// Unknown keys and invalid values are rejected with a ValidationError.
WorkloadProfile profile_from_json(const std::string& text);

}  // namespace drsync
