#include "drsync/workload.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "csv_util.hpp"
#include "drsync/error.hpp"
#include "drsync/rng.hpp"
#include "json_util.hpp"

namespace drsync {

namespace {

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::vector<std::string> validate(const WorkloadProfile& p) {
  std::vector<std::string> v;
  if (p.tick_period_ms < 1) v.push_back("tick_period_ms: must be >= 1");
  if (p.payload.body.empty() && p.payload.tail_prob < 1.0) v.push_back("payload.body: must not be empty");
  double mass = p.payload.tail_prob;
  for (const auto& [bytes, prob] : p.payload.body) {
    if (!is_prob(prob)) v.push_back("payload.body: probability out of [0,1]");
    mass += prob;
  }
  if (!is_prob(p.payload.tail_prob)) v.push_back("payload.tail_prob: must be in [0,1]");
  if (std::abs(mass - 1.0) > 1e-9) v.push_back("payload: body mass plus tail_prob must equal 1");
  if (p.payload.tail_prob > 0.0 && p.payload.tail_min > p.payload.tail_max) {
    v.push_back("payload.tail_range: min must not exceed max");
  }
  if (!is_prob(p.burst.p_enter)) v.push_back("burst.p_enter: must be in [0,1]");
  if (!is_prob(p.burst.p_exit)) v.push_back("burst.p_exit: must be in [0,1]");
  if (!(p.burst.burst_rate_multiplier >= 0.0) || !std::isfinite(p.burst.burst_rate_multiplier)) {
    v.push_back("burst.burst_rate_multiplier: must be finite and >= 0");
  }
  if (p.header_bytes < 1) v.push_back("header_bytes: must be >= 1");
  if (p.ack_every_n < 1) v.push_back("ack_every_n: must be >= 1");
  if (p.global_event.period_ms < 0) v.push_back("global_event.period_ms: must be >= 0");
  if (!is_prob(p.global_event.participation)) v.push_back("global_event.participation: must be in [0,1]");
  if (p.server.epoch_ms < 1) v.push_back("server.epoch_ms: must be >= 1");
  if (!(p.server.nearby_min >= 0.0) || p.server.nearby_min > p.server.nearby_max ||
      !std::isfinite(p.server.nearby_max)) {
    v.push_back("server: need 0 <= nearby_min <= nearby_max");
  }
  return v;
}

WorkloadProfile preset(std::string_view name) {
  WorkloadProfile p;
  if (name == "mmorpg") {
    // Calibrated against compute_stats: with 50 clients over 600 s this
    // yields ~98.8% of client packets under 71 bytes, ~7 Kbps per client,
    // ~73% header bytes and ~30% ack bytes.
    p.name = "mmorpg";
    p.tick_period_ms = 200;
    p.payload.body = {{6, 0.06}, {12, 0.09}, {19, 0.12}, {24, 0.18}, {28, 0.24}, {30, 0.295}};
    p.payload.tail_prob = 0.015;
    p.payload.tail_min = 40;
    p.payload.tail_max = 200;
    p.burst = {0.10, 0.13, 3.0};
    p.header_bytes = 40;
    p.ack_every_n = 2;
    p.global_event = {10000, 0.8};
    p.server = {10000, 1.0, 1.8};
    return p;
  }
  if (name == "fps") {
    // Near-constant bit rate: one fixed-size-ish update every 50 ms.
    p.name = "fps";
    p.tick_period_ms = 50;
    p.payload.body = {{180, 0.25}, {190, 0.5}, {200, 0.25}};
    p.payload.tail_prob = 0.0;
    p.burst = {0.0, 1.0, 1.0};
    p.header_bytes = 40;
    p.ack_every_n = 2;
    p.global_event = {0, 0.0};
    p.server = {10000, 1.0, 1.0};
    return p;
  }
  throw Error(Errc::lookup, "unknown workload preset '" + std::string(name) + "'");
}

std::string_view to_string(Direction d) {
  return d == Direction::ClientToServer ? "c2s" : "s2c";
}

Direction parse_direction(std::string_view text) {
  text = csv::trim(text);
  if (text == "c2s") return Direction::ClientToServer;
  if (text == "s2c") return Direction::ServerToClient;
  throw Error(Errc::input, "unknown direction '" + std::string(text) + "'");
}

namespace {

std::uint32_t draw_payload(const PayloadSizeDist& dist, Rng& rng) {
  const double u = rng.uniform01();
  const std::int64_t tail_draw = rng.uniform_int(dist.tail_min, std::max(dist.tail_min, dist.tail_max));
  if (u < dist.tail_prob) return static_cast<std::uint32_t>(tail_draw);
  double acc = dist.tail_prob;
  for (const auto& [bytes, prob] : dist.body) {
    acc += prob;
    if (u < acc) return bytes;
  }
  return dist.body.empty() ? static_cast<std::uint32_t>(tail_draw) : dist.body.back().first;
}

std::uint32_t stochastic_round(double x, Rng& rng) {
  const double whole = std::floor(x);
  const bool extra = rng.bernoulli(x - whole);
  return static_cast<std::uint32_t>(whole) + (extra ? 1u : 0u);
}

/// One connection's records, in generation order (already time-sorted).
void generate_client(const WorkloadProfile& p, std::uint32_t conn, std::int64_t duration_ms,
                     std::uint64_t seed, std::vector<TraceRecord>& out) {
  Rng rng(derive_seed(seed, conn));
  bool bursting = false;
  double nearby = 1.0;
  std::int64_t epoch = -1;
  std::uint32_t client_unacked = 0;  // client data awaiting a server ack
  std::uint32_t server_unacked = 0;  // server data awaiting a client ack

  auto spread = [&](std::int64_t t, std::uint32_t i, std::uint32_t n) {
    return t + static_cast<std::int64_t>(i) * p.tick_period_ms / static_cast<std::int64_t>(n);
  };

  for (std::int64_t t = 0; t < duration_ms; t += p.tick_period_ms) {
    if (t / p.server.epoch_ms != epoch) {
      epoch = t / p.server.epoch_ms;
      nearby = rng.uniform(p.server.nearby_min, p.server.nearby_max);
    }

    std::uint32_t sends = bursting ? stochastic_round(p.burst.burst_rate_multiplier, rng) : 1;
    if (p.global_event.period_ms > 0 && t % p.global_event.period_ms == 0) {
      if (rng.bernoulli(p.global_event.participation)) ++sends;
    }

    for (std::uint32_t i = 0; i < sends; ++i) {
      const std::int64_t at = spread(t, i, sends);
      out.push_back({at, conn, Direction::ClientToServer, draw_payload(p.payload, rng), p.header_bytes, false});
      if (++client_unacked == p.ack_every_n) {
        client_unacked = 0;
        out.push_back({at, conn, Direction::ServerToClient, 0, p.header_bytes, true});
      }
    }

    const std::uint32_t replies = stochastic_round(nearby * static_cast<double>(sends), rng);
    for (std::uint32_t i = 0; i < replies; ++i) {
      const std::int64_t at = spread(t, i, replies);
      out.push_back({at, conn, Direction::ServerToClient, draw_payload(p.payload, rng), p.header_bytes, false});
      if (++server_unacked == p.ack_every_n) {
        server_unacked = 0;
        out.push_back({at, conn, Direction::ClientToServer, 0, p.header_bytes, true});
      }
    }

    if (bursting) {
      if (rng.bernoulli(p.burst.p_exit)) bursting = false;
    } else if (rng.bernoulli(p.burst.p_enter)) {
      bursting = true;
    }
  }
}

}  // namespace

Trace generate_trace(const WorkloadProfile& profile, std::uint32_t n_clients, std::int64_t duration_ms,
                     std::uint64_t seed) {
  if (auto v = validate(profile); !v.empty()) throw ValidationError(std::move(v));
  if (duration_ms < profile.tick_period_ms) {
    throw Error(Errc::input, "generate_trace: duration_ms must be >= tick_period_ms");
  }
  Trace trace;
  trace.duration_ms = duration_ms;
  trace.n_clients = n_clients;
  for (std::uint32_t c = 0; c < n_clients; ++c) {
    std::vector<TraceRecord> records;
    generate_client(profile, c, duration_ms, seed, records);
    // Burst packets are spread across the tick, so a client's own stream
    // can interleave with its replies; sort each connection before merging.
    std::stable_sort(records.begin(), records.end(),
                     [](const TraceRecord& a, const TraceRecord& b) { return a.t_ms < b.t_ms; });
    const auto mid = trace.records.insert(trace.records.end(), records.begin(), records.end());
    std::inplace_merge(trace.records.begin(), mid, trace.records.end(),
                       [](const TraceRecord& a, const TraceRecord& b) { return a.t_ms < b.t_ms; });
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << "t_ms,conn_id,direction,payload_bytes,header_bytes,is_ack\n";
  for (const auto& r : records) {
    out << r.t_ms << ',' << r.conn_id << ',' << to_string(r.direction) << ',' << r.payload_bytes << ','
        << r.header_bytes << ',' << (r.is_ack ? 1 : 0) << '\n';
  }
}

Trace read_trace_csv(std::istream& in) {
  csv::expect_header(in, "t_ms,conn_id,direction,payload_bytes,header_bytes,is_ack");
  Trace trace;
  std::set<std::uint32_t> conns;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 6) throw Error(Errc::input, "line " + std::to_string(line_no) + ": want 6 fields");
    TraceRecord r;
    r.t_ms = csv::parse_number<std::int64_t>(f[0], line_no);
    r.conn_id = csv::parse_number<std::uint32_t>(f[1], line_no);
    r.direction = parse_direction(f[2]);
    r.payload_bytes = csv::parse_number<std::uint32_t>(f[3], line_no);
    r.header_bytes = csv::parse_number<std::uint32_t>(f[4], line_no);
    r.is_ack = csv::parse_bool(f[5], line_no);
    if (r.is_ack && r.payload_bytes != 0) {
      throw Error(Errc::input, "line " + std::to_string(line_no) + ": ack record with payload");
    }
    if (!trace.records.empty() && r.t_ms < trace.records.back().t_ms) {
      throw Error(Errc::input, "line " + std::to_string(line_no) + ": trace is not time-sorted");
    }
    conns.insert(r.conn_id);
    trace.records.push_back(r);
  }
  trace.n_clients = static_cast<std::uint32_t>(conns.size());
  trace.duration_ms = trace.records.empty() ? 0 : trace.records.back().t_ms + 1;
  return trace;
}

std::string profile_to_json(const WorkloadProfile& p) {
  using jsonutil::json;
  json body = json::array();
  for (const auto& [bytes, prob] : p.payload.body) body.push_back({{"bytes", bytes}, {"prob", prob}});
  json j = {
      {"name", p.name},
      {"tick_period_ms", p.tick_period_ms},
      {"payload_size_dist",
       {{"body", body}, {"tail_prob", p.payload.tail_prob}, {"tail_range", {p.payload.tail_min, p.payload.tail_max}}}},
      {"burst",
       {{"p_enter", p.burst.p_enter}, {"p_exit", p.burst.p_exit}, {"burst_rate_multiplier", p.burst.burst_rate_multiplier}}},
      {"header_bytes", p.header_bytes},
      {"ack_every_n", p.ack_every_n},
      {"global_event", {{"period_ms", p.global_event.period_ms}, {"participation", p.global_event.participation}}},
      {"server", {{"epoch_ms", p.server.epoch_ms}, {"nearby_min", p.server.nearby_min}, {"nearby_max", p.server.nearby_max}}},
  };
  return j.dump(2) + "\n";
}

WorkloadProfile profile_from_json(const std::string& text) {
  using jsonutil::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("profile: malformed JSON: ") + e.what()});
  }
  std::vector<std::string> errors;
  jsonutil::Reader r(errors);
  WorkloadProfile p;
  if (r.object(j, "profile", {"name", "tick_period_ms", "payload_size_dist", "burst", "header_bytes",
                              "ack_every_n", "global_event", "server"})) {
    r.get(j, "profile", "name", p.name);
    r.get(j, "profile", "tick_period_ms", p.tick_period_ms);
    r.get(j, "profile", "header_bytes", p.header_bytes);
    r.get(j, "profile", "ack_every_n", p.ack_every_n);
    if (j.contains("payload_size_dist")) {
      const json& d = j["payload_size_dist"];
      if (r.object(d, "profile.payload_size_dist", {"body", "tail_prob", "tail_range"})) {
        r.get(d, "profile.payload_size_dist", "tail_prob", p.payload.tail_prob);
        if (d.contains("tail_range")) {
          const json& tr = d["tail_range"];
          if (tr.is_array() && tr.size() == 2 && tr[0].is_number_unsigned() && tr[1].is_number_unsigned()) {
            p.payload.tail_min = tr[0].get<std::uint32_t>();
            p.payload.tail_max = tr[1].get<std::uint32_t>();
          } else {
            r.error("profile.payload_size_dist.tail_range: expected [min, max] byte counts");
          }
        }
        if (d.contains("body")) {
          if (!d["body"].is_array()) {
            r.error("profile.payload_size_dist.body: expected an array");
          } else {
            std::size_t i = 0;
            for (const json& e : d["body"]) {
              const std::string path = "profile.payload_size_dist.body[" + std::to_string(i++) + "]";
              std::uint32_t bytes = 0;
              double prob = 0.0;
              if (r.object(e, path, {"bytes", "prob"})) {
                r.get(e, path, "bytes", bytes);
                r.get(e, path, "prob", prob);
              }
              p.payload.body.emplace_back(bytes, prob);
            }
          }
        }
      }
    }
    if (j.contains("burst")) {
      const json& b = j["burst"];
      if (r.object(b, "profile.burst", {"p_enter", "p_exit", "burst_rate_multiplier"})) {
        r.get(b, "profile.burst", "p_enter", p.burst.p_enter);
        r.get(b, "profile.burst", "p_exit", p.burst.p_exit);
        r.get(b, "profile.burst", "burst_rate_multiplier", p.burst.burst_rate_multiplier);
      }
    }
    if (j.contains("global_event")) {
      const json& g = j["global_event"];
      if (r.object(g, "profile.global_event", {"period_ms", "participation"})) {
        r.get(g, "profile.global_event", "period_ms", p.global_event.period_ms);
        r.get(g, "profile.global_event", "participation", p.global_event.participation);
      }
    }
    if (j.contains("server")) {
      const json& s = j["server"];
      if (r.object(s, "profile.server", {"epoch_ms", "nearby_min", "nearby_max"})) {
        r.get(s, "profile.server", "epoch_ms", p.server.epoch_ms);
        r.get(s, "profile.server", "nearby_min", p.server.nearby_min);
        r.get(s, "profile.server", "nearby_max", p.server.nearby_max);
      }
    }
  }
  for (auto& v : validate(p)) errors.push_back("profile." + v);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return p;
}

}  // namespace drsync
