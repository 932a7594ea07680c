#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "drsync/dr_vector.hpp"

namespace drsync {

struct ProtocolConfig {
  double threshold = 1.0;  // world units
  std::int64_t tick_ms = 50;
  std::int64_t min_send_interval_ms = 0;
};

/// Sender side of the DR exchange for one entity. Call tick() once per
/// sampling period with the entity's true position; it returns a new DR
/// vector whenever the receiver's prediction would drift past the threshold.
class DRSender {
 public:
  explicit DRSender(EntityId entity, ProtocolConfig cfg);

  std::optional<DRVector> tick(const Vec3& true_pos, TimeMs t);

  const ProtocolConfig& config() const noexcept { return cfg_; }
  const std::optional<DRVector>& last_sent() const noexcept { return last_sent_; }
  std::uint64_t next_seq() const noexcept { return next_seq_; }

  /// Overrides the previous-tick sample used for velocity estimation.
  void set_prev_true_pos(const Vec3& pos) { prev_true_pos_ = pos; }

 private:
  Vec3 estimate_velocity(const Vec3& true_pos) const;

  EntityId entity_;
  ProtocolConfig cfg_;
  std::optional<DRVector> last_sent_;
  std::optional<Vec3> prev_true_pos_;
  std::optional<TimeMs> last_tick_;
  std::uint64_t next_seq_ = 1;
};

/// Receiver side: newest-wins by sequence number, per entity.
class DRReceiver {
 public:
  /// Returns false (and leaves state untouched) for stale or duplicate vectors.
  bool apply(const DRVector& dr);

  std::optional<Vec3> render(EntityId entity, TimeMs t) const;
  const DRVector* latest(EntityId entity) const;

 private:
  std::map<EntityId, DRVector> latest_;
};

struct ErrorSample {
  TimeMs t;
  EntityId entity = 0;
  double error = 0.0;
};

struct ExportErrorReport {
  std::vector<ErrorSample> samples;  // ticks with a rendered position, in input order
  double mean = 0.0;
  double max = 0.0;
  double p95 = 0.0;
  std::size_t samples_count = 0;
  std::size_t warmup_ticks = 0;  // ticks before the first rendered position
};

struct TruthSample {
  TimeMs t;
  Vec3 position;
};

struct RenderedSample {
  TimeMs t;
  std::optional<Vec3> position;
};

/// Nearest-rank percentile (q in (0,1]) of the values; values need not be sorted.
double nearest_rank_percentile(std::vector<double> values, double q);

/// Per-tick export error for one entity. Both series must share the same
/// tick instants (Errc::alignment otherwise).
ExportErrorReport compute_export_error(const std::vector<TruthSample>& truth,
                                       const std::vector<RenderedSample>& rendered,
                                       EntityId entity = 0);

}  // namespace drsync
