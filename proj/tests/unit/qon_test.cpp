#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "drsync/error.hpp"
#include "drsync/qon.hpp"

namespace drsync {
namespace {

SessionMetrics metrics(double rtt, double jitter, double loss) { return {rtt, jitter, loss, 1.0}; }

SessionMetrics random_metrics(Rng& rng) {
  return metrics(rng.uniform(0, 1000), rng.uniform(0, 200), rng.uniform(0, 0.5));
}

TEST(QuitProbability, BelowKneeIsBaseHazard) {
  ChurnModelParams p;
  EXPECT_DOUBLE_EQ(quit_probability(p, metrics(50, 0, 0)), p.q0);
  EXPECT_DOUBLE_EQ(quit_probability(p, metrics(100, 0, 0)), p.q0);
}

TEST(QuitProbability, HandComputed) {
  ChurnModelParams p;
  p.q0 = 0.01;
  p.a = 0.5;
  p.b = 0.05;
  // 0.01 + 0.5*0.1 + 0.05*(300-100)/100
  EXPECT_NEAR(quit_probability(p, metrics(300, 0, 0.1)), 0.16, 1e-12);
}

TEST(QuitProbability, ClampedToOne) {
  EXPECT_EQ(quit_probability({}, metrics(10000, 0, 1.0)), 1.0);
}

TEST(GroundTruth, ZeroHazardNeverQuits) {
  ChurnModelParams p;
  p.q0 = 0.0;
  p.a = 0.0;
  p.b = 0.0;
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_FALSE(ground_truth_quit(p, metrics(900, 50, 0.4), rng));
}

TEST(GroundTruth, DeterministicAndFrequencyMatchesHazard) {
  ChurnModelParams p;
  const auto m = metrics(300, 0, 0.1);
  const double q = quit_probability(p, m);
  Rng a(5), b(5);
  int quits = 0;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const bool x = ground_truth_quit(p, m, a);
    EXPECT_EQ(x, ground_truth_quit(p, m, b));
    quits += x ? 1 : 0;
  }
  const double sigma = std::sqrt(kDraws * q * (1 - q));
  EXPECT_NEAR(quits, kDraws * q, 3 * sigma);
}

TEST(RiskScore, ZeroWeightsGiveOneHalf) {
  EXPECT_DOUBLE_EQ(risk_score({}, metrics(250, 30, 0.2)), 0.5);
}

TEST(RiskScore, StrictlyBetweenZeroAndOne) {
  Rng rng(3);
  const auto w = default_weights();
  for (int i = 0; i < 1000; ++i) {
    const double s = risk_score(w, random_metrics(rng));
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(RiskScore, MonotoneInLatencyAndLoss) {
  Rng rng(11);
  const auto w = default_weights();
  ASSERT_GE(w.w_latency, 0.0);
  ASSERT_GE(w.w_loss, 0.0);
  for (int i = 0; i < 1000; ++i) {
    const auto lo = random_metrics(rng);
    auto hi = lo;
    hi.rtt_mean_ms += rng.uniform(0, 200);
    hi.loss_rate += rng.uniform(0, 0.2);
    EXPECT_GE(risk_score(w, hi), risk_score(w, lo));
  }
}

TEST(DefaultWeights, LowRiskWithoutImpairment) {
  EXPECT_LE(risk_score(default_weights(), metrics(0, 0, 0)), 0.1);
}

TEST(DefaultWeights, ReproducibleFromCalibrationFit) {
  auto data = generate_sessions({}, {}, kCalibrationSessions, kCalibrationSeed);
  data.resize(kCalibrationSessions * 7 / 10);
  const auto w = fit_weights(data, {0.5, 3000});
  const auto d = default_weights();
  EXPECT_NEAR(w.bias, d.bias, 1e-12);
  EXPECT_NEAR(w.w_latency, d.w_latency, 1e-12);
  EXPECT_NEAR(w.w_loss, d.w_loss, 1e-12);
  EXPECT_NEAR(w.w_jitter, d.w_jitter, 1e-12);
}

TEST(Fit, SeparableTwoPointData) {
  std::vector<LabeledSession> data{{metrics(20, 0, 0.0), false}, {metrics(800, 0, 0.3), true}};
  const auto w = fit_weights(data, {0.5, 500});
  EXPECT_EQ(accuracy(w, data), 1.0);
}

TEST(Fit, FlippedLabelsFlipLossWeight) {
  auto data = generate_sessions({}, {}, 400, 17);
  const auto w = fit_weights(data, {0.5, 1000});
  for (auto& s : data) s.quit_premature = !s.quit_premature;
  const auto v = fit_weights(data, {0.5, 1000});
  EXPECT_GT(w.w_loss, 0.0);
  EXPECT_LT(v.w_loss, 0.0);
}

TEST(Fit, DegenerateDataRejected) {
  for (const auto& data : {std::vector<LabeledSession>{},
                           std::vector<LabeledSession>{{metrics(10, 0, 0), true}, {metrics(20, 0, 0), true}}}) {
    try {
      fit_weights(data);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::degenerate_data);
    }
  }
}

TEST(Fit, GradientMatchesFiniteDifferences) {
  const auto data = generate_sessions({}, {}, 300, 99);
  Rng rng(4);
  for (int point = 0; point < 5; ++point) {
    PredictorWeights w{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const auto g = log_loss_gradient(w, data);
    const double analytic[4] = {g.bias, g.w_latency, g.w_loss, g.w_jitter};
    double* fields[4] = {&w.bias, &w.w_latency, &w.w_loss, &w.w_jitter};
    for (int i = 0; i < 4; ++i) {
      constexpr double h = 1e-6;
      const double saved = *fields[i];
      *fields[i] = saved + h;
      const double up = log_loss(w, data);
      *fields[i] = saved - h;
      const double down = log_loss(w, data);
      *fields[i] = saved;
      const double numeric = (up - down) / (2 * h);
      EXPECT_LE(std::abs(numeric - analytic[i]), 1e-5 * std::max(1.0, std::abs(analytic[i])))
          << "point " << point << " component " << i;
    }
  }
}

TEST(DecideAction, Examples) {
  EXPECT_EQ(decide_action(0.2, 0.5, true), Action::None);
  EXPECT_EQ(decide_action(0.2, 0.5, false), Action::None);
  EXPECT_EQ(decide_action(0.8, 0.5, true), Action::ReactivateAuto);
  EXPECT_EQ(decide_action(0.8, 0.5, false), Action::NotifyMessage);
  EXPECT_EQ(decide_action(0.5, 0.5, true), Action::ReactivateAuto);
}

TEST(DecideAction, TotalOverGrid) {
  for (int i = 0; i <= 100; ++i) {
    for (bool rec : {true, false}) {
      const double s = i / 100.0;
      const Action a = decide_action(s, 0.5, rec);
      EXPECT_EQ(a == Action::None, s < 0.5);
    }
  }
}

TEST(SessionsCsv, RoundTripAndUnlabeled) {
  const auto data = generate_sessions({}, {}, 50, 2);
  std::stringstream buf;
  write_sessions_csv(buf, data);
  bool labels = false;
  const auto back = read_sessions_csv(buf, &labels);
  ASSERT_TRUE(labels);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].metrics.rtt_mean_ms, data[i].metrics.rtt_mean_ms);
    EXPECT_EQ(back[i].quit_premature, data[i].quit_premature);
  }
  std::istringstream unlabeled("rtt_mean_ms,rtt_jitter_ms,loss_rate,elapsed_min\n100,5,0.01,3\n");
  const auto rows = read_sessions_csv(unlabeled, &labels);
  EXPECT_FALSE(labels);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].metrics.loss_rate, 0.01);
}

TEST(SessionsCsv, RejectsBadRows) {
  std::istringstream negative("rtt_mean_ms,rtt_jitter_ms,loss_rate,elapsed_min\n-1,5,0.01,3\n");
  EXPECT_THROW(read_sessions_csv(negative), Error);
  std::istringstream header("rtt,loss\n1,2\n");
  EXPECT_THROW(read_sessions_csv(header), Error);
}

TEST(WeightsJson, RoundTripAndStrictKeys) {
  const auto w = default_weights();
  EXPECT_EQ(weights_from_json(weights_to_json(w)), w);
  EXPECT_THROW(weights_from_json(R"({"bias": 1, "w_latency": 0, "w_loss": 0, "w_jitter": 0, "extra": 2})"),
               ValidationError);
  EXPECT_THROW(weights_from_json("not json"), Error);
}

}  // namespace
}  // namespace drsync
