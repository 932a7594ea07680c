#include "drsync/net_sim.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "csv_util.hpp"
#include "drsync/error.hpp"

namespace drsync {

namespace {

constexpr std::uint64_t kRetransmitStream = 0x7265747278ULL;  // "retrx"

void check_sends(const std::vector<SendRequest>& sends) {
  for (std::size_t i = 0; i < sends.size(); ++i) {
    if (sends[i].seq != i + 1) {
      throw Error(Errc::input, "transport input: seq " + std::to_string(sends[i].seq) + " at position " +
                                   std::to_string(i) + ", want contiguous seqs from 1");
    }
    if (i > 0 && sends[i].send < sends[i - 1].send) {
      throw Error(Errc::input, "transport input: send times must be non-decreasing");
    }
  }
}

void check_channel(const ChannelConfig& cfg) {
  if (cfg.base_latency_ms < 0 || cfg.jitter_max_ms < 0 || !(cfg.loss_rate >= 0.0 && cfg.loss_rate <= 1.0)) {
    throw Error(Errc::input, "channel config out of domain");
  }
}

}  // namespace

Channel::Channel(const ChannelConfig& cfg) : Channel(cfg, cfg.seed) {}

Channel::Channel(const ChannelConfig& cfg, std::uint64_t stream_seed) : cfg_(cfg), rng_(stream_seed) {
  check_channel(cfg_);
}

std::optional<TimeMs> Channel::transmit(TimeMs send) {
  const bool lost = rng_.uniform01() < cfg_.loss_rate;
  const std::int64_t jitter = rng_.uniform_int(0, cfg_.jitter_max_ms);
  if (lost) return std::nullopt;
  return send + cfg_.base_latency_ms + jitter;
}

std::optional<DejitterResult> dejitter_deliver(const DejitterConfig& cfg, std::int64_t base_latency_ms,
                                               TimeMs send, TimeMs arrive) {
  if (arrive < send) throw Error(Errc::input, "de-jitter: arrival precedes send");
  const TimeMs playout = send + base_latency_ms + cfg.playout_delay_ms;
  if (arrive <= playout) return DejitterResult{playout, false};
  if (cfg.late_policy == LatePolicy::Drop) return std::nullopt;
  return DejitterResult{arrive, true};
}

std::vector<DeliveryEvent> reliable_run(const LinkFn& link, const ReliableOrdered& transport,
                                        const std::vector<SendRequest>& sends) {
  check_sends(sends);
  if (transport.rto_ms < 1) throw Error(Errc::input, "rto_ms must be >= 1");
  std::vector<DeliveryEvent> events;
  events.reserve(sends.size());
  std::optional<TimeMs> prev_deliver;
  for (const auto& s : sends) {
    DeliveryEvent ev{s.seq, s.send, std::nullopt, std::nullopt, false, 0};
    TimeMs attempt = s.send;
    std::optional<TimeMs> arrive = link(s.seq, 0, attempt);
    while (!arrive) {
      attempt += transport.rto_ms;
      ++ev.retransmissions;
      arrive = link(s.seq, ev.retransmissions, attempt);
    }
    ev.arrive = arrive;
    // Head-of-line blocking: the application sees packets strictly in order.
    ev.deliver = prev_deliver ? std::max(*arrive, *prev_deliver) : *arrive;
    prev_deliver = ev.deliver;
    events.push_back(ev);
  }
  return events;
}

std::vector<DeliveryEvent> unreliable_run(const LinkFn& link, std::int64_t base_latency_ms,
                                          const DejitterConfig& dejitter, const std::vector<SendRequest>& sends) {
  check_sends(sends);
  std::vector<DeliveryEvent> events;
  events.reserve(sends.size());
  for (const auto& s : sends) {
    DeliveryEvent ev{s.seq, s.send, link(s.seq, 0, s.send), std::nullopt, false, 0};
    if (ev.arrive) {
      if (auto played = dejitter_deliver(dejitter, base_latency_ms, s.send, *ev.arrive)) {
        ev.deliver = played->deliver;
        ev.late = played->late;
      } else {
        ev.late = true;
      }
    }
    events.push_back(ev);
  }
  return events;
}

std::vector<DeliveryEvent> reliable_run(const ChannelConfig& chan, const ReliableOrdered& transport,
                                        const std::vector<SendRequest>& sends) {
  if (chan.loss_rate >= 1.0) {
    throw Error(Errc::input, "reliable transport cannot deliver over a channel with loss_rate 1");
  }
  Channel first(chan);
  Channel retx(chan, derive_seed(chan.seed, kRetransmitStream));
  return reliable_run(
      [&](std::uint64_t, std::uint32_t attempt, TimeMs send) {
        return attempt == 0 ? first.transmit(send) : retx.transmit(send);
      },
      transport, sends);
}

std::vector<DeliveryEvent> unreliable_run(const ChannelConfig& chan, const DejitterConfig& dejitter,
                                          const std::vector<SendRequest>& sends) {
  Channel channel(chan);
  return unreliable_run([&](std::uint64_t, std::uint32_t, TimeMs send) { return channel.transmit(send); },
                        chan.base_latency_ms, dejitter, sends);
}

std::vector<DeliveryEvent> run_transport(const ChannelConfig& chan, const TransportMode& mode,
                                         const DejitterConfig& dejitter,
                                         const std::vector<SendRequest>& sends) {
  if (const auto* reliable = std::get_if<ReliableOrdered>(&mode)) return reliable_run(chan, *reliable, sends);
  return unreliable_run(chan, dejitter, sends);
}

TransportCounts count_transport(const std::vector<DeliveryEvent>& events) {
  TransportCounts c;
  for (const auto& ev : events) {
    c.transmissions += 1 + ev.retransmissions;
    c.lost_transmissions += ev.retransmissions + (ev.arrive ? 0 : 1);
    if (ev.arrive) ++c.arrived;
    if (ev.deliver) ++c.delivered;
    if (ev.late && ev.deliver) ++c.late;
    if (ev.arrive && !ev.deliver) ++c.dropped_late;
  }
  return c;
}

void write_delivery_csv(std::ostream& out, const std::vector<DeliveryEvent>& events) {
  out << "seq,send_ms,arrive_ms,deliver_ms,late,retransmissions\n";
  for (const auto& ev : events) {
    out << ev.seq << ',' << ev.send.count() << ',';
    if (ev.arrive) out << ev.arrive->count();
    out << ',';
    if (ev.deliver) out << ev.deliver->count();
    out << ',' << (ev.late ? 1 : 0) << ',' << ev.retransmissions << '\n';
  }
}

std::vector<DeliveryEvent> read_delivery_csv(std::istream& in) {
  csv::expect_header(in, "seq,send_ms,arrive_ms,deliver_ms,late,retransmissions");
  std::vector<DeliveryEvent> events;
  std::string line;
  std::size_t line_no = 1;
  auto optional_time = [&](std::string_view field) -> std::optional<TimeMs> {
    if (csv::trim(field).empty()) return std::nullopt;
    return TimeMs{csv::parse_number<std::int64_t>(field, line_no)};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 6) throw Error(Errc::input, "line " + std::to_string(line_no) + ": want 6 fields");
    DeliveryEvent ev;
    ev.seq = csv::parse_number<std::uint64_t>(f[0], line_no);
    ev.send = TimeMs{csv::parse_number<std::int64_t>(f[1], line_no)};
    ev.arrive = optional_time(f[2]);
    ev.deliver = optional_time(f[3]);
    ev.late = csv::parse_bool(f[4], line_no);
    ev.retransmissions = csv::parse_number<std::uint32_t>(f[5], line_no);
    events.push_back(ev);
  }
  return events;
}

}  // namespace drsync
