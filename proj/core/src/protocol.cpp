#include "drsync/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drsync/error.hpp"

namespace drsync {

DRSender::DRSender(EntityId entity, ProtocolConfig cfg) : entity_(entity), cfg_(cfg) {
  if (cfg_.tick_ms < 1) throw Error(Errc::input, "protocol tick_ms must be >= 1");
  if (!(cfg_.threshold >= 0.0)) throw Error(Errc::input, "protocol threshold must be >= 0");
  if (cfg_.min_send_interval_ms < 0) throw Error(Errc::input, "min_send_interval_ms must be >= 0");
}

Vec3 DRSender::estimate_velocity(const Vec3& true_pos) const {
  if (!prev_true_pos_) return {};
  return (true_pos - *prev_true_pos_) * (1000.0 / static_cast<double>(cfg_.tick_ms));
}

std::optional<DRVector> DRSender::tick(const Vec3& true_pos, TimeMs t) {
  if (last_tick_ && t < *last_tick_) {
    throw Error(Errc::clock, "sender tick at t=" + std::to_string(t.count()) + " after t=" +
                                 std::to_string(last_tick_->count()));
  }
  if (!true_pos.finite()) throw Error(Errc::input, "sender tick with non-finite position");

  bool send = !last_sent_.has_value();
  if (!send) {
    const Vec3 predicted = extrapolate(*last_sent_, t);
    send = deviation(true_pos, predicted) > cfg_.threshold &&
           (t - last_sent_->t_sent) >= cfg_.min_send_interval_ms;
  }

  std::optional<DRVector> emitted;
  if (send) {
    emitted = DRVector{entity_, next_seq_, t, true_pos, estimate_velocity(true_pos)};
    last_sent_ = emitted;
    ++next_seq_;
  }
  prev_true_pos_ = true_pos;
  last_tick_ = t;
  return emitted;
}

bool DRReceiver::apply(const DRVector& dr) {
  auto it = latest_.find(dr.entity_id);
  if (it != latest_.end() && dr.seq <= it->second.seq) return false;
  latest_[dr.entity_id] = dr;
  return true;
}

const DRVector* DRReceiver::latest(EntityId entity) const {
  auto it = latest_.find(entity);
  return it == latest_.end() ? nullptr : &it->second;
}

std::optional<Vec3> DRReceiver::render(EntityId entity, TimeMs t) const {
  const DRVector* dr = latest(entity);
  if (!dr) return std::nullopt;
  return extrapolate(*dr, std::max(t, dr->t_sent));
}

double nearest_rank_percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

ExportErrorReport compute_export_error(const std::vector<TruthSample>& truth,
                                       const std::vector<RenderedSample>& rendered, EntityId entity) {
  if (truth.size() != rendered.size()) {
    throw Error(Errc::alignment, "export error: " + std::to_string(truth.size()) + " truth samples vs " +
                                     std::to_string(rendered.size()) + " rendered samples");
  }
  ExportErrorReport report;
  std::vector<double> errors;
  errors.reserve(truth.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].t != rendered[i].t) {
      throw Error(Errc::alignment, "export error: tick " + std::to_string(i) + " has t=" +
                                       std::to_string(truth[i].t.count()) + " vs t=" +
                                       std::to_string(rendered[i].t.count()));
    }
    if (!rendered[i].position) {
      ++report.warmup_ticks;
      continue;
    }
    const double e = deviation(truth[i].position, *rendered[i].position);
    report.samples.push_back({truth[i].t, entity, e});
    errors.push_back(e);
    sum += e;
    report.max = std::max(report.max, e);
  }
  report.samples_count = errors.size();
  if (!errors.empty()) {
    report.mean = sum / static_cast<double>(errors.size());
    report.p95 = nearest_rank_percentile(std::move(errors), 0.95);
  }
  return report;
}

}  // namespace drsync
