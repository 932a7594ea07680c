#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "drsync/time.hpp"
#include "drsync/vec3.hpp"

namespace drsync {

struct Waypoint {
  TimeMs t;
  Vec3 position;
};

/// Piecewise-linear ground-truth path. Waypoint times are strictly
/// increasing and there are at least two of them.
class TrajectoryScript {
 public:
  explicit TrajectoryScript(std::vector<Waypoint> waypoints);

  const std::vector<Waypoint>& waypoints() const noexcept { return waypoints_; }
  TimeMs start() const { return waypoints_.front().t; }
  TimeMs end() const { return waypoints_.back().t; }

 private:
  std::vector<Waypoint> waypoints_;
};

/// Throws Errc::out_of_range outside [start, end].
Vec3 sample_trajectory(const TrajectoryScript& script, TimeMs t);

struct TrajectoryGeneratorParams {
  double box_size = 1000.0;
  double speed_min = 1.0;
  double speed_max = 10.0;
  std::int64_t segment_min_ms = 2000;
  std::int64_t segment_max_ms = 5000;
};

/// Seeded random walk inside [0, box_size]^3 with piecewise-constant speed.
/// Covers at least [0, duration_ms].
TrajectoryScript generate_trajectory(const TrajectoryGeneratorParams& params,
                                     std::int64_t duration_ms, std::uint64_t seed);

/// CSV with header `t_ms,x,y,z`.
TrajectoryScript load_trajectory_csv(const std::filesystem::path& path);
void save_trajectory_csv(const TrajectoryScript& script, const std::filesystem::path& path);

}  // namespace drsync
