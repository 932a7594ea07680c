#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drsync/rng.hpp"

namespace drsync {

struct SessionMetrics {
  double rtt_mean_ms = 0.0;
  double rtt_jitter_ms = 0.0;  // standard deviation
  double loss_rate = 0.0;
  double elapsed_min = 0.0;
};

/// Synthetic ground truth for premature departure: a per-minute quit hazard
/// that grows with loss and with latency beyond the knee.
struct ChurnModelParams {
  double q0 = 0.002;
  double a = 1.0;
  double b = 0.15;
  double latency_knee_ms = 100.0;
  double premature_window_min = 5.0;
};

struct PredictorWeights {
  double bias = 0.0;
  double w_latency = 0.0;
  double w_loss = 0.0;
  double w_jitter = 0.0;

  bool operator==(const PredictorWeights&) const = default;
};

enum class Action { None, ReactivateAuto, NotifyMessage };

std::string_view to_string(Action action);

struct RiskAssessment {
  double score = 0.0;
  bool premature_flag = false;
  Action action = Action::None;
};

inline constexpr double kDefaultDecisionThreshold = 0.5;

/// clamp(q0 + a*loss + b*max(0, rtt - knee)/100, 0, 1)
double quit_probability(const ChurnModelParams& params, const SessionMetrics& m);
bool ground_truth_quit(const ChurnModelParams& params, const SessionMetrics& m, Rng& rng);

/// Normalized predictor inputs: rtt/500, loss, jitter/100.
struct Features {
  double latency = 0.0;
  double loss = 0.0;
  double jitter = 0.0;
};
Features features(const SessionMetrics& m);

double logistic(double z);
double risk_score(const PredictorWeights& w, const SessionMetrics& m);

struct LabeledSession {
  SessionMetrics metrics;
  bool quit_premature = false;
};

struct FitHyper {
  double learn_rate = 0.5;
  int epochs = 3000;
};

/// Mean binary cross-entropy of the logistic model over the dataset.
double log_loss(const PredictorWeights& w, const std::vector<LabeledSession>& data);
/// Analytic gradient of log_loss, ordered (bias, latency, loss, jitter).
PredictorWeights log_loss_gradient(const PredictorWeights& w,
                                   const std::vector<LabeledSession>& data);

/// Full-batch gradient descent from zero weights. Throws
/// Errc::degenerate_data for empty or single-class data.
PredictorWeights fit_weights(const std::vector<LabeledSession>& data, const FitHyper& hyper = {});

Action decide_action(double score, double threshold, bool connectivity_recoverable);
RiskAssessment assess(const PredictorWeights& w, const SessionMetrics& m, bool connectivity_recoverable,
                      double threshold = kDefaultDecisionThreshold);

/// Synthetic session population: RTT log-uniform on [rtt_min, rtt_max],
/// loss = loss_max * u^loss_power (most sessions see little loss), jitter a
/// uniform fraction of the RTT.
struct SessionPopulation {
  double rtt_min_ms = 20.0;
  double rtt_max_ms = 800.0;
  double loss_max = 0.3;
  double loss_power = 3.0;
  double jitter_fraction_max = 0.3;
};

/// Draws metrics, then simulates up to premature_window_min one-minute
/// ground-truth quit draws. elapsed_min is the minute the player left, or
/// the window length for players who stayed.
std::vector<LabeledSession> generate_sessions(const ChurnModelParams& params,
                                              const SessionPopulation& population,
                                              std::size_t count, std::uint64_t seed);

inline constexpr std::uint64_t kCalibrationSeed = 20240601;
inline constexpr std::size_t kCalibrationSessions = 1000;

/// Weights produced by fit_weights on the first 70% of
/// generate_sessions({}, {}, kCalibrationSessions, kCalibrationSeed).
PredictorWeights default_weights();

double accuracy(const PredictorWeights& w, const std::vector<LabeledSession>& data,
                double threshold = kDefaultDecisionThreshold);

/// CSV: `rtt_mean_ms,rtt_jitter_ms,loss_rate,elapsed_min,quit_premature`.
void write_sessions_csv(std::ostream& out, const std::vector<LabeledSession>& data);
/// Accepts the labeled header or the four metric columns alone (labels false).
std::vector<LabeledSession> read_sessions_csv(std::istream& in, bool* has_labels = nullptr);

std::string weights_to_json(const PredictorWeights& w);
PredictorWeights weights_from_json(const std::string& text);

}  // namespace drsync
