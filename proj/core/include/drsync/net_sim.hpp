#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "drsync/rng.hpp"
#include "drsync/time.hpp"

namespace drsync {

struct ChannelConfig {
  std::int64_t base_latency_ms = 0;
  std::int64_t jitter_max_ms = 0;
  double loss_rate = 0.0;
  std::uint64_t seed = 0;
};

struct ReliableOrdered {
  std::int64_t rto_ms = 200;
};
struct UnreliableDR {};
using TransportMode = std::variant<ReliableOrdered, UnreliableDR>;

enum class LatePolicy { DeliverLate, Drop };

struct DejitterConfig {
  std::int64_t playout_delay_ms = 0;
  LatePolicy late_policy = LatePolicy::DeliverLate;
};

/// Seeded lossy, jittery link. Every transmit() consumes exactly two draws
/// from the stream, loss first and jitter second, whether or not the packet
/// survives.
class Channel {
 public:
  explicit Channel(const ChannelConfig& cfg);
  Channel(const ChannelConfig& cfg, std::uint64_t stream_seed);

  std::optional<TimeMs> transmit(TimeMs send);

  const ChannelConfig& config() const noexcept { return cfg_; }

 private:
  ChannelConfig cfg_;
  Rng rng_;
};

struct DejitterResult {
  TimeMs deliver;
  bool late = false;
};

/// Playout at send + base latency + playout delay. Returns nullopt when the
/// packet misses its playout slot under LatePolicy::Drop.
std::optional<DejitterResult> dejitter_deliver(const DejitterConfig& cfg,
                                               std::int64_t base_latency_ms, TimeMs send,
                                               TimeMs arrive);

struct SendRequest {
  std::uint64_t seq = 0;
  TimeMs send;
};

struct DeliveryEvent {
  std::uint64_t seq = 0;
  TimeMs send;
  std::optional<TimeMs> arrive;
  std::optional<TimeMs> deliver;
  bool late = false;
  std::uint32_t retransmissions = 0;

  bool operator==(const DeliveryEvent&) const = default;
};

/// Arrival time for transmission attempt `attempt` (0 = first) of packet
/// `seq` sent at `send`, or nullopt when the attempt is lost.
using LinkFn = std::function<std::optional<TimeMs>(std::uint64_t seq, std::uint32_t attempt, TimeMs send)>;

std::vector<DeliveryEvent> reliable_run(const LinkFn& link, const ReliableOrdered& transport,
                                        const std::vector<SendRequest>& sends);
std::vector<DeliveryEvent> unreliable_run(const LinkFn& link, std::int64_t base_latency_ms,
                                          const DejitterConfig& dejitter, const std::vector<SendRequest>& sends);

/// Fixed-RTO, in-order stand-in for TCP. Retransmissions draw from a
/// separate substream so first-attempt draws match unreliable_run.
std::vector<DeliveryEvent> reliable_run(const ChannelConfig& chan, const ReliableOrdered& transport,
                                        const std::vector<SendRequest>& sends);

std::vector<DeliveryEvent> unreliable_run(const ChannelConfig& chan, const DejitterConfig& dejitter,
                                          const std::vector<SendRequest>& sends);

std::vector<DeliveryEvent> run_transport(const ChannelConfig& chan, const TransportMode& mode,
                                         const DejitterConfig& dejitter,
                                         const std::vector<SendRequest>& sends);

struct TransportCounts {
  std::uint64_t transmissions = 0;  // first attempts plus retransmissions
  std::uint64_t lost_transmissions = 0;
  std::uint64_t arrived = 0;    // transmissions that reached the receiver host
  std::uint64_t delivered = 0;  // handed to the application
  std::uint64_t late = 0;
  std::uint64_t dropped_late = 0;  // arrived but discarded by the de-jitter buffer
};

TransportCounts count_transport(const std::vector<DeliveryEvent>& events);

/// CSV: `seq,send_ms,arrive_ms,deliver_ms,late,retransmissions`, empty
/// fields for absent values.
void write_delivery_csv(std::ostream& out, const std::vector<DeliveryEvent>& events);
std::vector<DeliveryEvent> read_delivery_csv(std::istream& in);

}  // namespace drsync
