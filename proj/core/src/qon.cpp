#include "drsync/qon.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "csv_util.hpp"
#include "drsync/error.hpp"
#include "json_util.hpp"

namespace drsync {

std::string_view to_string(Action action) {
  switch (action) {
    case Action::None: return "none";
    case Action::ReactivateAuto: return "reactivate_auto";
    case Action::NotifyMessage: return "notify_message";
  }
  return "none";
}

double quit_probability(const ChurnModelParams& params, const SessionMetrics& m) {
  const double over_knee = std::max(0.0, m.rtt_mean_ms - params.latency_knee_ms);
  const double q = params.q0 + params.a * m.loss_rate + params.b * over_knee / 100.0;
  return std::clamp(q, 0.0, 1.0);
}

bool ground_truth_quit(const ChurnModelParams& params, const SessionMetrics& m, Rng& rng) {
  return rng.bernoulli(quit_probability(params, m));
}

Features features(const SessionMetrics& m) {
  return {m.rtt_mean_ms / 500.0, m.loss_rate, m.rtt_jitter_ms / 100.0};
}

double logistic(double z) {
  // Split by sign so exp() never overflows.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double linear(const PredictorWeights& w, const Features& f) {
  return w.bias + w.w_latency * f.latency + w.w_loss * f.loss + w.w_jitter * f.jitter;
}

}  // namespace

double risk_score(const PredictorWeights& w, const SessionMetrics& m) { return logistic(linear(w, features(m))); }

double log_loss(const PredictorWeights& w, const std::vector<LabeledSession>& data) {
  if (data.empty()) throw Error(Errc::degenerate_data, "log_loss: empty dataset");
  double total = 0.0;
  for (const auto& s : data) {
    const double z = linear(w, features(s.metrics));
    // log(1 + e^z) - y*z, evaluated stably.
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - (s.quit_premature ? z : 0.0);
  }
  return total / static_cast<double>(data.size());
}

PredictorWeights log_loss_gradient(const PredictorWeights& w, const std::vector<LabeledSession>& data) {
  if (data.empty()) throw Error(Errc::degenerate_data, "log_loss_gradient: empty dataset");
  PredictorWeights g;
  for (const auto& s : data) {
    const Features f = features(s.metrics);
    const double residual = logistic(linear(w, f)) - (s.quit_premature ? 1.0 : 0.0);
    g.bias += residual;
    g.w_latency += residual * f.latency;
    g.w_loss += residual * f.loss;
    g.w_jitter += residual * f.jitter;
  }
  const auto n = static_cast<double>(data.size());
  return {g.bias / n, g.w_latency / n, g.w_loss / n, g.w_jitter / n};
}

PredictorWeights fit_weights(const std::vector<LabeledSession>& data, const FitHyper& hyper) {
  if (data.empty()) throw Error(Errc::degenerate_data, "fit_weights: empty dataset");
  const auto positives = std::count_if(data.begin(), data.end(), [](const auto& s) { return s.quit_premature; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(data.size())) {
    throw Error(Errc::degenerate_data, "fit_weights: dataset needs both labels");
  }
  if (!(hyper.learn_rate > 0.0) || hyper.epochs < 0) {
    throw Error(Errc::input, "fit_weights: learn_rate must be positive and epochs non-negative");
  }
  PredictorWeights w;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const PredictorWeights g = log_loss_gradient(w, data);
    w.bias -= hyper.learn_rate * g.bias;
    w.w_latency -= hyper.learn_rate * g.w_latency;
    w.w_loss -= hyper.learn_rate * g.w_loss;
    w.w_jitter -= hyper.learn_rate * g.w_jitter;
  }
  return w;
}

Action decide_action(double score, double threshold, bool connectivity_recoverable) {
  if (score < threshold) return Action::None;
  return connectivity_recoverable ? Action::ReactivateAuto : Action::NotifyMessage;
}

RiskAssessment assess(const PredictorWeights& w, const SessionMetrics& m, bool connectivity_recoverable,
                      double threshold) {
  RiskAssessment r;
  r.score = risk_score(w, m);
  r.premature_flag = r.score >= threshold;
  r.action = decide_action(r.score, threshold, connectivity_recoverable);
  return r;
}

std::vector<LabeledSession> generate_sessions(const ChurnModelParams& params, const SessionPopulation& pop,
                                              std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const double log_lo = std::log(pop.rtt_min_ms);
  const double log_hi = std::log(pop.rtt_max_ms);
  const int minutes = static_cast<int>(std::ceil(params.premature_window_min));
  std::vector<LabeledSession> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    LabeledSession s;
    s.metrics.rtt_mean_ms = std::exp(rng.uniform(log_lo, log_hi));
    s.metrics.loss_rate = pop.loss_max * std::pow(rng.uniform01(), pop.loss_power);
    s.metrics.rtt_jitter_ms = s.metrics.rtt_mean_ms * rng.uniform(0.0, pop.jitter_fraction_max);
    s.metrics.elapsed_min = params.premature_window_min;
    for (int minute = 1; minute <= minutes; ++minute) {
      if (ground_truth_quit(params, s.metrics, rng)) {
        s.quit_premature = true;
        s.metrics.elapsed_min = minute;
        break;
      }
    }
    out.push_back(s);
  }
  return out;
}

PredictorWeights default_weights() {
  // fit_weights(first 700 of generate_sessions({}, {}, 1000, kCalibrationSeed), {0.5, 3000})
  return {-2.3511692030260427, 6.9120496555730844, 10.791962649229971, -0.54473658319943352};
}

double accuracy(const PredictorWeights& w, const std::vector<LabeledSession>& data, double threshold) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : data) correct += (risk_score(w, s.metrics) >= threshold) == s.quit_premature ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

void write_sessions_csv(std::ostream& out, const std::vector<LabeledSession>& data) {
  out << "rtt_mean_ms,rtt_jitter_ms,loss_rate,elapsed_min,quit_premature\n";
  for (const auto& s : data) {
    out << csv::format_double(s.metrics.rtt_mean_ms) << ',' << csv::format_double(s.metrics.rtt_jitter_ms) << ','
        << csv::format_double(s.metrics.loss_rate) << ',' << csv::format_double(s.metrics.elapsed_min) << ','
        << (s.quit_premature ? 1 : 0) << '\n';
  }
}

std::vector<LabeledSession> read_sessions_csv(std::istream& in, bool* has_labels) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::input, "missing CSV header");
  const auto header = csv::trim(line);
  bool labeled = false;
  if (header == "rtt_mean_ms,rtt_jitter_ms,loss_rate,elapsed_min,quit_premature") {
    labeled = true;
  } else if (header != "rtt_mean_ms,rtt_jitter_ms,loss_rate,elapsed_min") {
    throw Error(Errc::input, "unexpected session CSV header '" + line + "'");
  }
  if (has_labels) *has_labels = labeled;
  std::vector<LabeledSession> data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != (labeled ? 5u : 4u)) {
      throw Error(Errc::input, "line " + std::to_string(line_no) + ": wrong field count");
    }
    LabeledSession s;
    s.metrics.rtt_mean_ms = csv::parse_number<double>(f[0], line_no);
    s.metrics.rtt_jitter_ms = csv::parse_number<double>(f[1], line_no);
    s.metrics.loss_rate = csv::parse_number<double>(f[2], line_no);
    s.metrics.elapsed_min = csv::parse_number<double>(f[3], line_no);
    if (labeled) s.quit_premature = csv::parse_bool(f[4], line_no);
    const auto& m = s.metrics;
    if (!(m.rtt_mean_ms >= 0 && m.rtt_jitter_ms >= 0 && m.loss_rate >= 0 && m.loss_rate <= 1 && m.elapsed_min >= 0)) {
      throw Error(Errc::input, "line " + std::to_string(line_no) + ": session metrics out of domain");
    }
    data.push_back(s);
  }
  return data;
}

std::string weights_to_json(const PredictorWeights& w) {
  jsonutil::json j = {{"bias", w.bias}, {"w_latency", w.w_latency}, {"w_loss", w.w_loss}, {"w_jitter", w.w_jitter}};
  return j.dump(2) + "\n";
}

PredictorWeights weights_from_json(const std::string& text) {
  jsonutil::json j;
  try {
    j = jsonutil::json::parse(text);
  } catch (const jsonutil::json::parse_error& e) {
    throw ValidationError({std::string("weights: malformed JSON: ") + e.what()});
  }
  std::vector<std::string> errors;
  jsonutil::Reader r(errors);
  PredictorWeights w;
  if (r.object(j, "weights", {"bias", "w_latency", "w_loss", "w_jitter"})) {
    for (const char* key : {"bias", "w_latency", "w_loss", "w_jitter"}) {
      if (!j.contains(key)) errors.push_back(std::string("weights.") + key + ": missing");
    }
    r.get(j, "weights", "bias", w.bias);
    r.get(j, "weights", "w_latency", w.w_latency);
    r.get(j, "weights", "w_loss", w.w_loss);
    r.get(j, "weights", "w_jitter", w.w_jitter);
  }
  for (double v : {w.bias, w.w_latency, w.w_loss, w.w_jitter}) {
    if (!std::isfinite(v)) errors.push_back("weights: values must be finite");
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return w;
}

}  // namespace drsync
