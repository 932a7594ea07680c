#include "drsync/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csv_util.hpp"
#include "drsync/error.hpp"
#include "drsync/rng.hpp"
#include "json_util.hpp"

namespace drsync {

namespace {

constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kTrajectoryStream = 2;
constexpr EntityId kEntity = 1;
constexpr std::int64_t kProbeWindowMs = 30000;

using jsonutil::json;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string_view to_string(LatePolicy p) { return p == LatePolicy::Drop ? "drop" : "deliver_late"; }

json summary_json(const RunSummary& s) {
  const auto& c = s.transport_counts;
  return {
      {"transport", to_string(s.transport)},
      {"seed", s.seed},
      {"export_error",
       {{"mean", s.error_mean},
        {"max", s.error_max},
        {"p95", s.error_p95},
        {"samples", s.error_samples},
        {"warmup_ticks", s.warmup_ticks},
        {"sends", s.dr_sends}}},
      {"traffic",
       {{"dr_sends", s.dr_sends},
        {"packets_sent", s.packets_sent},
        {"bytes_sent", s.bytes_sent},
        {"transmissions", c.transmissions},
        {"lost_transmissions", c.lost_transmissions},
        {"arrived", c.arrived},
        {"delivered", c.delivered},
        {"late", c.late},
        {"dropped_late", c.dropped_late}}},
      {"qon",
       {{"rtt_mean_ms", s.session.rtt_mean_ms},
        {"rtt_jitter_ms", s.session.rtt_jitter_ms},
        {"loss_rate", s.session.loss_rate},
        {"elapsed_min", s.session.elapsed_min},
        {"score", s.risk.score},
        {"premature_flag", s.risk.premature_flag},
        {"action", to_string(s.risk.action)}}},
  };
}

void write_outputs(const ScenarioConfig& cfg, const RunResult& r, const PredictorWeights& weights) {
  const auto& dir = cfg.output_dir;
  ensure_dir(dir);
  write_file(dir / "config.json", scenario_to_json(cfg));

  std::ostringstream truth;
  truth << "t_ms,x,y,z\n";
  for (const auto& s : r.truth) {
    truth << s.t.count() << ',' << csv::format_double(s.position.x) << ',' << csv::format_double(s.position.y)
          << ',' << csv::format_double(s.position.z) << '\n';
  }
  write_file(dir / "truth.csv", truth.str());

  std::ostringstream sends;
  sends << "seq,t_sent_ms,x,y,z,vx,vy,vz\n";
  for (const auto& d : r.sent) {
    sends << d.seq << ',' << d.t_sent.count() << ',' << csv::format_double(d.position.x) << ','
          << csv::format_double(d.position.y) << ',' << csv::format_double(d.position.z) << ','
          << csv::format_double(d.velocity.x) << ',' << csv::format_double(d.velocity.y) << ','
          << csv::format_double(d.velocity.z) << '\n';
  }
  write_file(dir / "dr_sends.csv", sends.str());

  std::ostringstream deliveries;
  write_delivery_csv(deliveries, r.deliveries);
  write_file(dir / "deliveries.csv", deliveries.str());

  std::ostringstream errors;
  errors << "t_ms,entity_id,error\n";
  for (const auto& e : r.report.samples) {
    errors << e.t.count() << ',' << e.entity << ',' << csv::format_double(e.error) << '\n';
  }
  write_file(dir / "export_error.csv", errors.str());

  json summary = summary_json(r.summary);
  summary["qon"]["weights"] = json::parse(weights_to_json(weights));
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace

std::string_view to_string(TransportKind kind) {
  return kind == TransportKind::ReliableOrdered ? "reliable_ordered" : "unreliable_dr";
}

std::vector<std::string> validate(const ScenarioConfig& cfg) {
  std::vector<std::string> v;
  const auto& p = cfg.protocol;
  if (!(p.threshold >= 0.0) || !std::isfinite(p.threshold)) v.push_back("protocol.threshold: must be finite and >= 0");
  if (p.tick_ms < 1) v.push_back("protocol.tick_ms: must be >= 1");
  if (p.min_send_interval_ms < 0) v.push_back("protocol.min_send_interval_ms: must be >= 0");
  const auto& c = cfg.channel;
  if (c.base_latency_ms < 0) v.push_back("channel.base_latency_ms: must be >= 0");
  if (c.jitter_max_ms < 0) v.push_back("channel.jitter_max_ms: must be >= 0");
  if (!(c.loss_rate >= 0.0 && c.loss_rate <= 1.0)) v.push_back("channel.loss_rate: must be in [0,1]");
  if (cfg.rto_ms < 1) v.push_back("transport.rto_ms: must be >= 1");
  if (cfg.transport == TransportKind::ReliableOrdered && c.loss_rate >= 1.0) {
    v.push_back("channel.loss_rate: reliable transport needs loss_rate < 1");
  }
  if (cfg.dejitter.playout_delay_ms < 0) v.push_back("dejitter.playout_delay_ms: must be >= 0");
  if (cfg.duration_ms < 0) v.push_back("duration_ms: must be >= 0");
  if (p.tick_ms >= 1 && cfg.duration_ms < p.tick_ms) v.push_back("duration_ms: must cover at least one tick");
  if (!cfg.trajectory_file) {
    const auto& t = cfg.trajectory;
    if (!(t.box_size > 0.0) || !std::isfinite(t.box_size)) v.push_back("trajectory.generator.box_size: must be > 0");
    if (!(t.speed_min >= 0.0) || !(t.speed_min <= t.speed_max) || !std::isfinite(t.speed_max)) {
      v.push_back("trajectory.generator: need 0 <= speed_min <= speed_max");
    }
    if (t.segment_min_ms < 1 || t.segment_min_ms > t.segment_max_ms) {
      v.push_back("trajectory.generator: need 1 <= segment_min_ms <= segment_max_ms");
    }
  }
  return v;
}

ScenarioConfig scenario_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("config: malformed JSON: ") + e.what()});
  }
  std::vector<std::string> errors;
  jsonutil::Reader r(errors);
  ScenarioConfig cfg;
  if (!r.object(j, "config", {"trajectory", "protocol", "channel", "transport", "dejitter", "duration_ms", "seed",
                              "output_dir"})) {
    throw ValidationError(std::move(errors));
  }
  if (j.contains("trajectory")) {
    const json& t = j["trajectory"];
    if (r.object(t, "config.trajectory", {"file", "generator"})) {
      if (t.contains("file") && t.contains("generator")) {
        r.error("config.trajectory: give either file or generator, not both");
      }
      if (t.contains("file")) {
        std::string file;
        r.get(t, "config.trajectory", "file", file);
        std::filesystem::path path(file);
        cfg.trajectory_file = path.is_absolute() || base_dir.empty() ? path : base_dir / path;
      }
      if (t.contains("generator")) {
        const json& g = t["generator"];
        const std::string path = "config.trajectory.generator";
        if (r.object(g, path, {"box_size", "speed_min", "speed_max", "segment_min_ms", "segment_max_ms"})) {
          r.get(g, path, "box_size", cfg.trajectory.box_size);
          r.get(g, path, "speed_min", cfg.trajectory.speed_min);
          r.get(g, path, "speed_max", cfg.trajectory.speed_max);
          r.get(g, path, "segment_min_ms", cfg.trajectory.segment_min_ms);
          r.get(g, path, "segment_max_ms", cfg.trajectory.segment_max_ms);
        }
      }
    }
  }
  if (j.contains("protocol")) {
    const json& p = j["protocol"];
    if (r.object(p, "config.protocol", {"threshold", "tick_ms", "min_send_interval_ms"})) {
      r.get(p, "config.protocol", "threshold", cfg.protocol.threshold);
      r.get(p, "config.protocol", "tick_ms", cfg.protocol.tick_ms);
      r.get(p, "config.protocol", "min_send_interval_ms", cfg.protocol.min_send_interval_ms);
    }
  }
  if (j.contains("channel")) {
    const json& c = j["channel"];
    if (r.object(c, "config.channel", {"base_latency_ms", "jitter_max_ms", "loss_rate"})) {
      r.get(c, "config.channel", "base_latency_ms", cfg.channel.base_latency_ms);
      r.get(c, "config.channel", "jitter_max_ms", cfg.channel.jitter_max_ms);
      r.get(c, "config.channel", "loss_rate", cfg.channel.loss_rate);
    }
  }
  if (j.contains("transport")) {
    const json& t = j["transport"];
    if (r.object(t, "config.transport", {"mode", "rto_ms"})) {
      std::string mode = std::string(to_string(cfg.transport));
      r.get(t, "config.transport", "mode", mode);
      if (mode == "reliable_ordered") {
        cfg.transport = TransportKind::ReliableOrdered;
      } else if (mode == "unreliable_dr") {
        cfg.transport = TransportKind::UnreliableDR;
      } else {
        r.error("config.transport.mode: expected reliable_ordered or unreliable_dr, got '" + mode + "'");
      }
      r.get(t, "config.transport", "rto_ms", cfg.rto_ms);
    }
  }
  if (j.contains("dejitter")) {
    const json& d = j["dejitter"];
    if (r.object(d, "config.dejitter", {"playout_delay_ms", "late_policy"})) {
      r.get(d, "config.dejitter", "playout_delay_ms", cfg.dejitter.playout_delay_ms);
      std::string policy = "deliver_late";
      r.get(d, "config.dejitter", "late_policy", policy);
      if (policy == "deliver_late") {
        cfg.dejitter.late_policy = LatePolicy::DeliverLate;
      } else if (policy == "drop") {
        cfg.dejitter.late_policy = LatePolicy::Drop;
      } else {
        r.error("config.dejitter.late_policy: expected deliver_late or drop, got '" + policy + "'");
      }
    }
  }
  r.get(j, "config", "duration_ms", cfg.duration_ms);
  r.get(j, "config", "seed", cfg.seed);
  if (j.contains("output_dir")) {
    std::string out;
    r.get(j, "config", "output_dir", out);
    cfg.output_dir = out;
  }
  for (auto& v : validate(cfg)) errors.push_back("config." + v);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json traj;
  if (cfg.trajectory_file) {
    traj["file"] = cfg.trajectory_file->generic_string();
  } else {
    traj["generator"] = {{"box_size", cfg.trajectory.box_size},
                         {"speed_min", cfg.trajectory.speed_min},
                         {"speed_max", cfg.trajectory.speed_max},
                         {"segment_min_ms", cfg.trajectory.segment_min_ms},
                         {"segment_max_ms", cfg.trajectory.segment_max_ms}};
  }
  json j = {
      {"trajectory", traj},
      {"protocol",
       {{"threshold", cfg.protocol.threshold},
        {"tick_ms", cfg.protocol.tick_ms},
        {"min_send_interval_ms", cfg.protocol.min_send_interval_ms}}},
      {"channel",
       {{"base_latency_ms", cfg.channel.base_latency_ms},
        {"jitter_max_ms", cfg.channel.jitter_max_ms},
        {"loss_rate", cfg.channel.loss_rate}}},
      {"transport", {{"mode", to_string(cfg.transport)}, {"rto_ms", cfg.rto_ms}}},
      {"dejitter",
       {{"playout_delay_ms", cfg.dejitter.playout_delay_ms}, {"late_policy", to_string(cfg.dejitter.late_policy)}}},
      {"duration_ms", cfg.duration_ms},
      {"seed", cfg.seed},
  };
  return j.dump(2) + "\n";
}

ChannelConfig effective_channel(const ScenarioConfig& cfg) {
  ChannelConfig c = cfg.channel;
  c.seed = derive_seed(cfg.seed, kChannelStream);
  return c;
}

TransportMode transport_mode(const ScenarioConfig& cfg) {
  if (cfg.transport == TransportKind::ReliableOrdered) return ReliableOrdered{cfg.rto_ms};
  return UnreliableDR{};
}

SessionMetrics session_metrics(const ChannelConfig& channel, const std::vector<DeliveryEvent>& events,
                               std::int64_t duration_ms) {
  SessionMetrics m;
  const TransportCounts counts = count_transport(events);
  m.loss_rate = counts.transmissions == 0
                    ? 0.0
                    : static_cast<double>(counts.lost_transmissions) / static_cast<double>(counts.transmissions);
  m.elapsed_min = static_cast<double>(duration_ms) / 60000.0;

  // Jitter is measured on first-attempt arrivals; retransmitted packets
  // carry RTO waits, not path delay variation.
  std::vector<double> jitter;
  for (const auto& ev : events) {
    if (!ev.arrive || ev.retransmissions > 0) continue;
    jitter.push_back(static_cast<double>(*ev.arrive - ev.send - channel.base_latency_ms));
  }
  double mean = 0.0;
  for (double j : jitter) mean += j;
  if (!jitter.empty()) mean /= static_cast<double>(jitter.size());
  double sq = 0.0;
  for (double j : jitter) sq += (j - mean) * (j - mean);
  m.rtt_mean_ms = 2.0 * static_cast<double>(channel.base_latency_ms) + mean;
  m.rtt_jitter_ms = jitter.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(jitter.size()));
  return m;
}

bool connectivity_recoverable(const std::vector<DeliveryEvent>& events, double loss_rate, std::int64_t duration_ms) {
  if (!(loss_rate < 0.5)) return false;
  const TimeMs window_start{duration_ms - kProbeWindowMs};
  return std::any_of(events.begin(), events.end(),
                     [&](const DeliveryEvent& ev) { return ev.arrive && *ev.arrive >= window_start; });
}

RunResult run_simulation(const ScenarioConfig& cfg) {
  if (auto v = validate(cfg); !v.empty()) throw ValidationError(std::move(v));
  const auto started = std::chrono::steady_clock::now();

  const TrajectoryScript script =
      cfg.trajectory_file ? load_trajectory_csv(*cfg.trajectory_file)
                          : generate_trajectory(cfg.trajectory, cfg.duration_ms, derive_seed(cfg.seed, kTrajectoryStream));
  if (script.start().count() > 0 || script.end().count() < cfg.duration_ms) {
    throw ValidationError({"trajectory: waypoints must cover [0, duration_ms]"});
  }

  RunResult result;
  DRSender sender(kEntity, cfg.protocol);
  std::vector<SendRequest> sends;
  for (TimeMs t{0}; t.count() <= cfg.duration_ms; t += cfg.protocol.tick_ms) {
    const Vec3 pos = sample_trajectory(script, t);
    result.truth.push_back({t, pos});
    if (auto dr = sender.tick(pos, t)) {
      sends.push_back({dr->seq, dr->t_sent});
      result.sent.push_back(*dr);
    }
  }

  const ChannelConfig channel = effective_channel(cfg);
  result.deliveries = run_transport(channel, transport_mode(cfg), cfg.dejitter, sends);

  // Apply deliveries in time order (ties by seq) before rendering each tick.
  std::vector<const DeliveryEvent*> order;
  for (const auto& ev : result.deliveries) {
    if (ev.deliver) order.push_back(&ev);
  }
  std::stable_sort(order.begin(), order.end(), [](const DeliveryEvent* a, const DeliveryEvent* b) {
    return *a->deliver != *b->deliver ? *a->deliver < *b->deliver : a->seq < b->seq;
  });
  DRReceiver receiver;
  std::size_t next = 0;
  for (const auto& sample : result.truth) {
    while (next < order.size() && *order[next]->deliver <= sample.t) {
      receiver.apply(result.sent[order[next]->seq - 1]);
      ++next;
    }
    result.rendered.push_back({sample.t, receiver.render(kEntity, sample.t)});
  }
  result.report = compute_export_error(result.truth, result.rendered, kEntity);

  RunSummary& s = result.summary;
  s.transport = cfg.transport;
  s.seed = cfg.seed;
  s.error_mean = result.report.mean;
  s.error_max = result.report.max;
  s.error_p95 = result.report.p95;
  s.error_samples = result.report.samples_count;
  s.warmup_ticks = result.report.warmup_ticks;
  s.dr_sends = result.sent.size();
  s.transport_counts = count_transport(result.deliveries);
  s.packets_sent = s.transport_counts.transmissions;
  s.bytes_sent = s.packets_sent * (kDrPayloadBytes + kDrHeaderBytes);
  s.session = session_metrics(channel, result.deliveries, cfg.duration_ms);
  const PredictorWeights weights = default_weights();
  s.risk = assess(weights, s.session,
                  connectivity_recoverable(result.deliveries, s.session.loss_rate, cfg.duration_ms));

  if (!cfg.output_dir.empty()) write_outputs(cfg, result, weights);
  s.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string summary_to_json(const RunSummary& summary) { return summary_json(summary).dump(2) + "\n"; }

CompareResult run_compare(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw ValidationError({"compare: need at least 2 seeds"});
  if (auto v = validate(cfg); !v.empty()) throw ValidationError(std::move(v));
  if (cfg.channel.loss_rate >= 1.0) throw ValidationError({"channel.loss_rate: reliable transport needs loss_rate < 1"});

  CompareResult result;
  for (std::uint64_t seed : seeds) {
    CompareRow row;
    row.seed = seed;
    for (TransportKind kind : {TransportKind::ReliableOrdered, TransportKind::UnreliableDR}) {
      ScenarioConfig run = cfg;
      run.seed = seed;
      run.transport = kind;
      if (!cfg.output_dir.empty()) {
        run.output_dir = cfg.output_dir / ("seed_" + std::to_string(seed)) /
                         (kind == TransportKind::ReliableOrdered ? "reliable" : "unreliable");
      }
      (kind == TransportKind::ReliableOrdered ? row.reliable : row.unreliable) = run_simulation(run).summary;
    }
    result.mean_difference += row.difference();
    if (row.unreliable.error_mean < row.reliable.error_mean) ++result.unreliable_wins;
    result.rows.push_back(row);
  }
  result.mean_difference /= static_cast<double>(result.rows.size());

  if (!cfg.output_dir.empty()) {
    std::ostringstream table;
    table << "seed,reliable_mean,unreliable_mean,difference,reliable_max,unreliable_max,reliable_p95,unreliable_p95\n";
    json rows = json::array();
    for (const auto& row : result.rows) {
      table << row.seed << ',' << csv::format_double(row.reliable.error_mean) << ','
            << csv::format_double(row.unreliable.error_mean) << ',' << csv::format_double(row.difference()) << ','
            << csv::format_double(row.reliable.error_max) << ',' << csv::format_double(row.unreliable.error_max) << ','
            << csv::format_double(row.reliable.error_p95) << ',' << csv::format_double(row.unreliable.error_p95)
            << '\n';
      rows.push_back({{"seed", row.seed},
                      {"reliable_mean", row.reliable.error_mean},
                      {"unreliable_mean", row.unreliable.error_mean},
                      {"difference", row.difference()}});
    }
    ensure_dir(cfg.output_dir);
    write_file(cfg.output_dir / "compare.csv", table.str());
    json summary = {{"seeds", seeds},
                    {"rows", rows},
                    {"mean_difference", result.mean_difference},
                    {"unreliable_wins", result.unreliable_wins}};
    write_file(cfg.output_dir / "compare_summary.json", summary.dump(2) + "\n");
  }
  return result;
}

}  // namespace drsync
