// drsync: dead-reckoning synchronization experiments from the command line.
//
// Exit codes: 0 success, 1 usage or validation error, 2 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "drsync/analysis.hpp"
#include "drsync/error.hpp"
#include "drsync/qon.hpp"
#include "drsync/scenario.hpp"
#include "drsync/workload.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("drsync");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("DRSYNC_LOG");
  const std::string value = level ? level : "info";
  if (value == "off") {
    spdlog::set_level(spdlog::level::off);
  } else if (value == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (value != "info") spdlog::warn("DRSYNC_LOG='{}' not one of off|info|debug; using info", value);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw drsync::IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw drsync::IoError("cannot write " + path.string());
  out << content;
  if (!out) throw drsync::IoError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw drsync::IoError("cannot create " + dir.string() + ": " + ec.message());
}

drsync::ScenarioConfig load_scenario(const fs::path& config, std::optional<std::uint64_t> seed,
                                     const fs::path& out) {
  auto cfg = drsync::scenario_from_json(read_file(config), config.parent_path());
  if (seed) cfg.seed = *seed;
  cfg.output_dir = out;
  return cfg;
}

int cmd_simulate(const fs::path& config, std::optional<std::uint64_t> seed, const fs::path& out) {
  const auto cfg = load_scenario(config, seed, out);
  spdlog::info("simulate: seed {} transport {} duration {} ms", cfg.seed, drsync::to_string(cfg.transport),
               cfg.duration_ms);
  const auto result = drsync::run_simulation(cfg);
  const auto& s = result.summary;
  spdlog::info("export error mean {:.4f} max {:.4f} p95 {:.4f}; {} DR sends; {:.1f} ms", s.error_mean, s.error_max,
               s.error_p95, s.dr_sends, s.wall_clock_ms);
  std::cout << drsync::summary_to_json(s);
  return kExitOk;
}

int cmd_compare(const fs::path& config, std::optional<std::uint64_t> seed, std::vector<std::uint64_t> seeds,
                int runs, const fs::path& out) {
  const auto cfg = load_scenario(config, seed, out);
  if (seeds.empty()) {
    const std::uint64_t first = seed.value_or(1);
    for (int i = 0; i < runs; ++i) seeds.push_back(first + static_cast<std::uint64_t>(i));
  }
  spdlog::info("compare: {} seeds", seeds.size());
  const auto result = drsync::run_compare(cfg, seeds);
  for (const auto& row : result.rows) {
    spdlog::info("seed {}: reliable {:.4f} unreliable {:.4f} diff {:+.4f}", row.seed, row.reliable.error_mean,
                 row.unreliable.error_mean, row.difference());
  }
  std::cout << read_file(out / "compare_summary.json");
  return kExitOk;
}

int cmd_generate(const std::string& preset_name, const std::optional<fs::path>& config, std::uint32_t clients,
                 std::int64_t duration_ms, std::uint64_t seed, const fs::path& out) {
  const auto profile =
      config ? drsync::profile_from_json(read_file(*config)) : drsync::preset(preset_name);
  spdlog::info("generate: profile '{}' {} clients {} ms seed {}", profile.name, clients, duration_ms, seed);
  const auto trace = drsync::generate_trace(profile, clients, duration_ms, seed);
  ensure_dir(out);
  std::ostringstream csv;
  drsync::write_trace_csv(csv, trace.records);
  write_file(out / "trace.csv", csv.str());
  write_file(out / "profile.json", drsync::profile_to_json(profile));
  spdlog::info("wrote {} records", trace.records.size());
  return kExitOk;
}

json direction_stats(const drsync::Trace& trace, drsync::Direction dir, std::int64_t bucket_ms) {
  const auto s = drsync::compute_stats(trace, dir);
  json j = {
      {"packets", s.packet_count},
      {"bytes", s.total_bytes},
      {"fraction_below_71", s.fraction_below(71)},
      {"mean_client_bandwidth_bps", s.mean_client_bandwidth_bps},
      {"header_byte_fraction", s.header_byte_fraction},
      {"ack_byte_fraction", s.ack_byte_fraction},
      {"ack_packet_fraction", s.ack_packet_fraction},
  };
  // Inter-arrival statistics pooled over connections with enough packets.
  std::vector<double> means;
  std::vector<double> stddevs;
  for (std::uint32_t conn = 0; conn < trace.n_clients; ++conn) {
    try {
      const auto ia = drsync::interarrival_stats(trace, conn, dir);
      means.push_back(ia.mean_ms);
      stddevs.push_back(ia.stddev_ms);
    } catch (const drsync::Error&) {
    }
  }
  if (!means.empty()) {
    double m = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
      m += means[i];
      sd += stddevs[i];
    }
    j["interarrival"] = {{"connections", means.size()},
                         {"mean_ms", m / static_cast<double>(means.size())},
                         {"stddev_ms", sd / static_cast<double>(means.size())}};
  }
  const auto series = drsync::count_series(trace, dir, bucket_ms);
  j["bucket_ms"] = bucket_ms;
  try {
    const auto r = drsync::autocorr_all(series.counts, std::min<std::size_t>(10, series.counts.size() - 1));
    j["aggregate_autocorr"] = std::vector<double>(r.begin() + 1, r.end());
  } catch (const drsync::Error& e) {
    j["aggregate_autocorr"] = nullptr;
  }
  if (series.counts.size() >= 8) {
    if (const auto period = drsync::detect_period(series)) {
      j["periodicity"] = {{"lag", period->lag}, {"period_ms", static_cast<std::int64_t>(period->lag) * bucket_ms},
                          {"strength", period->strength}};
    } else {
      j["periodicity"] = nullptr;
    }
  }
  return j;
}

std::string histogram_csv(const drsync::TraceStats& s) {
  std::ostringstream out;
  out << "bucket_low,bucket_high,count\n";
  for (const auto& [low, count] : s.size_histogram) {
    out << low << ',' << low + s.bucket_bytes - 1 << ',' << count << '\n';
  }
  return out.str();
}

int cmd_analyze(const fs::path& trace_path, std::optional<std::int64_t> duration_ms, std::int64_t bucket_ms,
                const fs::path& out) {
  std::ifstream in(trace_path);
  if (!in) throw drsync::IoError("cannot open trace " + trace_path.string());
  auto trace = drsync::read_trace_csv(in);
  if (duration_ms) trace.duration_ms = *duration_ms;
  spdlog::info("analyze: {} records, {} connections, {} ms", trace.records.size(), trace.n_clients,
               trace.duration_ms);
  json stats = {{"records", trace.records.size()},
                {"connections", trace.n_clients},
                {"duration_ms", trace.duration_ms}};
  ensure_dir(out);
  const auto c2s = direction_stats(trace, drsync::Direction::ClientToServer, bucket_ms);
  stats["fraction_below_71"] = c2s["fraction_below_71"];
  stats["c2s"] = c2s;
  write_file(out / "histogram.csv", histogram_csv(drsync::compute_stats(trace, drsync::Direction::ClientToServer)));
  const bool has_server = std::any_of(trace.records.begin(), trace.records.end(),
                                      [](const auto& r) { return r.direction == drsync::Direction::ServerToClient; });
  if (has_server) {
    stats["s2c"] = direction_stats(trace, drsync::Direction::ServerToClient, bucket_ms);
    write_file(out / "histogram_s2c.csv",
               histogram_csv(drsync::compute_stats(trace, drsync::Direction::ServerToClient)));
  }
  write_file(out / "stats.json", stats.dump(2) + "\n");
  std::cout << stats.dump(2) << '\n';
  return kExitOk;
}

int cmd_predict(const std::optional<fs::path>& weights_path, const fs::path& metrics_path, double threshold,
                const std::optional<fs::path>& out) {
  const auto weights =
      weights_path ? drsync::weights_from_json(read_file(*weights_path)) : drsync::default_weights();
  std::ifstream in(metrics_path);
  if (!in) throw drsync::IoError("cannot open metrics " + metrics_path.string());
  const auto sessions = drsync::read_sessions_csv(in);
  std::ostringstream csv;
  csv << "rtt_mean_ms,rtt_jitter_ms,loss_rate,elapsed_min,score,premature_flag,action\n";
  for (const auto& s : sessions) {
    // Without probe history, connectivity is recoverable whenever loss < 0.5.
    const auto risk = drsync::assess(weights, s.metrics, s.metrics.loss_rate < 0.5, threshold);
    csv << json(s.metrics.rtt_mean_ms).dump() << ',' << json(s.metrics.rtt_jitter_ms).dump() << ','
        << json(s.metrics.loss_rate).dump() << ',' << json(s.metrics.elapsed_min).dump() << ','
        << json(risk.score).dump() << ',' << (risk.premature_flag ? 1 : 0) << ','
        << drsync::to_string(risk.action) << '\n';
  }
  if (out) {
    ensure_dir(*out);
    write_file(*out / "scores.csv", csv.str());
  }
  std::cout << csv.str();
  return kExitOk;
}

int cmd_fit(const std::optional<fs::path>& dataset, std::uint64_t seed, std::size_t sessions, double learn_rate,
            int epochs, const fs::path& out) {
  std::vector<drsync::LabeledSession> data;
  if (dataset) {
    std::ifstream in(*dataset);
    if (!in) throw drsync::IoError("cannot open dataset " + dataset->string());
    bool labeled = false;
    data = drsync::read_sessions_csv(in, &labeled);
    if (!labeled) throw drsync::ValidationError({"fit: dataset has no quit_premature column"});
  } else {
    data = drsync::generate_sessions({}, {}, sessions, seed);
  }
  const std::size_t n_train = data.size() * 7 / 10;
  std::vector<drsync::LabeledSession> train(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<drsync::LabeledSession> test(data.begin() + static_cast<std::ptrdiff_t>(n_train), data.end());
  const auto w = drsync::fit_weights(train, {learn_rate, epochs});
  ensure_dir(out);
  std::ostringstream csv;
  drsync::write_sessions_csv(csv, data);
  write_file(out / "dataset.csv", csv.str());
  write_file(out / "weights.json", drsync::weights_to_json(w));
  json report = {{"sessions", data.size()},
                 {"train", train.size()},
                 {"test", test.size()},
                 {"train_accuracy", drsync::accuracy(w, train)},
                 {"test_accuracy", test.empty() ? 0.0 : drsync::accuracy(w, test)},
                 {"train_log_loss", drsync::log_loss(w, train)}};
  write_file(out / "fit_report.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"drsync: dead-reckoning state synchronization and network impairment experiments"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;

  auto* simulate = app.add_subcommand("simulate", "Run one scenario and write CSVs plus summary.json");
  simulate->add_option("--config", config, "Scenario JSON")->required();
  simulate->add_option("--seed", seed, "Master seed (overrides the config)");
  simulate->add_option("--out", out, "Output directory")->required();

  std::vector<std::uint64_t> seeds;
  int runs = 10;
  auto* compare = app.add_subcommand("compare", "Run both transports over several seeds");
  compare->add_option("--config", config, "Scenario JSON")->required();
  compare->add_option("--seed", seed, "First seed when --seeds is not given");
  compare->add_option("--seeds", seeds, "Explicit seed list")->delimiter(',');
  compare->add_option("--runs", runs, "Number of consecutive seeds")->check(CLI::Range(2, 100000));
  compare->add_option("--out", out, "Output directory")->required();

  std::string preset_name = "mmorpg";
  std::uint32_t clients = 50;
  std::int64_t duration_ms = 600000;
  std::optional<std::string> profile_path;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic game-traffic trace");
  generate->add_option("--preset", preset_name, "mmorpg | fps");
  generate->add_option("--config", profile_path, "Workload profile JSON (overrides --preset)");
  generate->add_option("--clients", clients, "Number of clients");
  generate->add_option("--duration-ms", duration_ms, "Trace length")->check(CLI::PositiveNumber);
  generate->add_option("--seed", seed, "Seed");
  generate->add_option("--out", out, "Output directory")->required();

  std::string trace_path;
  std::optional<std::int64_t> trace_duration;
  std::int64_t bucket_ms = 100;
  auto* analyze = app.add_subcommand("analyze", "Compute traffic statistics for a trace CSV");
  analyze->add_option("--trace", trace_path, "Trace CSV")->required();
  analyze->add_option("--duration-ms", trace_duration, "Trace duration (default: last t_ms + 1)")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--bucket-ms", bucket_ms, "Arrival-process bucket width")->check(CLI::PositiveNumber);
  analyze->add_option("--seed", seed, "Unused; accepted for symmetry");
  analyze->add_option("--out", out, "Output directory")->required();

  std::optional<std::string> weights_path;
  std::string metrics_path;
  double threshold = drsync::kDefaultDecisionThreshold;
  std::optional<std::string> predict_out;
  auto* predict = app.add_subcommand("predict", "Score sessions for premature-departure risk");
  predict->add_option("--weights", weights_path, "Weights JSON (default: calibrated weights)");
  predict->add_option("--metrics", metrics_path, "Session metrics CSV")->required();
  predict->add_option("--threshold", threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
  predict->add_option("--out", predict_out, "Output directory for scores.csv");

  std::optional<std::string> dataset;
  std::size_t sessions = drsync::kCalibrationSessions;
  drsync::FitHyper hyper;
  auto* fit = app.add_subcommand("fit", "Fit predictor weights on a labeled session dataset");
  fit->add_option("--dataset", dataset, "Labeled session CSV (default: synthetic dataset)");
  fit->add_option("--seed", seed, "Synthetic dataset seed");
  fit->add_option("--sessions", sessions, "Synthetic dataset size")->check(CLI::PositiveNumber);
  fit->add_option("--learn-rate", hyper.learn_rate, "Gradient descent step")->check(CLI::PositiveNumber);
  fit->add_option("--epochs", hyper.epochs, "Gradient descent epochs")->check(CLI::NonNegativeNumber);
  fit->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*simulate) return cmd_simulate(config, seed, out);
    if (*compare) return cmd_compare(config, seed, seeds, runs, out);
    if (*generate) return cmd_generate(preset_name, profile_path, clients, duration_ms, seed.value_or(1), out);
    if (*analyze) return cmd_analyze(trace_path, trace_duration, bucket_ms, out);
    if (*predict) {
      return cmd_predict(weights_path ? std::optional<fs::path>(*weights_path) : std::nullopt, metrics_path,
                         threshold, predict_out ? std::optional<fs::path>(*predict_out) : std::nullopt);
    }
    if (*fit) {
      return cmd_fit(dataset ? std::optional<fs::path>(*dataset) : std::nullopt,
                     seed.value_or(drsync::kCalibrationSeed), sessions, hyper.learn_rate, hyper.epochs, out);
    }
  } catch (const drsync::ValidationError& e) {
    // Failures are the command's result, not diagnostics: print them even with DRSYNC_LOG=off.
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const drsync::Error& e) {
    std::cerr << "error: " << drsync::to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == drsync::Errc::io ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitValidation;
}
