#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "csv_util.hpp"
#include "drsync/dr_vector.hpp"
#include "drsync/error.hpp"
#include "drsync/rng.hpp"
#include "drsync/trajectory.hpp"
#include "drsync/vec3.hpp"

namespace drsync {

double deviation(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

Vec3 extrapolate(const DRVector& dr, TimeMs t) {
  if (t < dr.t_sent) {
    throw Error(Errc::backward_extrapolation,
                "extrapolate: t=" + std::to_string(t.count()) + " precedes t_sent=" +
                    std::to_string(dr.t_sent.count()));
  }
  const double dt_s = static_cast<double>(t - dr.t_sent) / 1000.0;
  return dr.position + dr.velocity * dt_s;
}

TrajectoryScript::TrajectoryScript(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) throw Error(Errc::input, "trajectory needs at least 2 waypoints");
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    if (!waypoints_[i].position.finite()) {
      throw Error(Errc::input, "trajectory waypoint " + std::to_string(i) + " is not finite");
    }
    if (waypoints_[i].t.count() < 0) throw Error(Errc::input, "trajectory times must be non-negative");
    if (i > 0 && waypoints_[i].t <= waypoints_[i - 1].t) {
      throw Error(Errc::input, "trajectory waypoint times must be strictly increasing");
    }
  }
}

Vec3 sample_trajectory(const TrajectoryScript& script, TimeMs t) {
  const auto& wps = script.waypoints();
  if (t < script.start() || t > script.end()) {
    throw Error(Errc::out_of_range, "sample_trajectory: t=" + std::to_string(t.count()) +
                                        " outside [" + std::to_string(script.start().count()) + ", " +
                                        std::to_string(script.end().count()) + "]");
  }
  // First waypoint strictly after t; t sits in [prev, next).
  auto next = std::upper_bound(wps.begin(), wps.end(), t,
                               [](TimeMs value, const Waypoint& w) { return value < w.t; });
  if (next == wps.end()) return wps.back().position;
  auto prev = std::prev(next);
  if (t == prev->t) return prev->position;
  const double frac = static_cast<double>(t - prev->t) / static_cast<double>(next->t - prev->t);
  return prev->position + (next->position - prev->position) * frac;
}

namespace {

Vec3 random_direction(Rng& rng) {
  // Uniform on the unit sphere.
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

double reflect_into(double v, double box) {
  // Mirror back into [0, box]; segments are short relative to the box.
  if (v < 0.0) v = -v;
  if (v > box) v = 2.0 * box - v;
  return std::clamp(v, 0.0, box);
}

}  // namespace

TrajectoryScript generate_trajectory(const TrajectoryGeneratorParams& params, std::int64_t duration_ms,
                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Waypoint> wps;
  Vec3 pos{rng.uniform(0.0, params.box_size), rng.uniform(0.0, params.box_size),
           rng.uniform(0.0, params.box_size)};
  TimeMs t{0};
  wps.push_back({t, pos});
  while (t.count() < duration_ms || wps.size() < 2) {
    const std::int64_t seg = rng.uniform_int(params.segment_min_ms, params.segment_max_ms);
    const double speed = rng.uniform(params.speed_min, params.speed_max);
    const Vec3 dir = random_direction(rng);
    const Vec3 step = dir * (speed * static_cast<double>(seg) / 1000.0);
    pos = {reflect_into(pos.x + step.x, params.box_size), reflect_into(pos.y + step.y, params.box_size),
           reflect_into(pos.z + step.z, params.box_size)};
    t += seg;
    wps.push_back({t, pos});
  }
  return TrajectoryScript(std::move(wps));
}

TrajectoryScript load_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file " + path.string());
  csv::expect_header(in, "t_ms,x,y,z");
  std::vector<Waypoint> wps;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw Error(Errc::input, "line " + std::to_string(line_no) + ": want 4 fields");
    wps.push_back({TimeMs{csv::parse_number<std::int64_t>(f[0], line_no)},
                   {csv::parse_number<double>(f[1], line_no), csv::parse_number<double>(f[2], line_no),
                    csv::parse_number<double>(f[3], line_no)}});
  }
  return TrajectoryScript(std::move(wps));
}

void save_trajectory_csv(const TrajectoryScript& script, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "t_ms,x,y,z\n";
  for (const auto& w : script.waypoints()) {
    out << w.t.count() << ',' << csv::format_double(w.position.x) << ','
        << csv::format_double(w.position.y) << ',' << csv::format_double(w.position.z) << '\n';
  }
}

}  // namespace drsync
