#pragma once

#include <cstdint>

#include "drsync/time.hpp"
#include "drsync/vec3.hpp"

namespace drsync {

using EntityId = std::uint32_t;

/// One dead-reckoning update: where the entity was at `t_sent` and how fast
/// it was moving (world units per second) along each axis.
struct DRVector {
  EntityId entity_id = 0;
  std::uint64_t seq = 0;
  TimeMs t_sent;
  Vec3 position;
  Vec3 velocity;

  bool operator==(const DRVector&) const = default;
};

/// Linear prediction of the entity's position at `t`. Throws
/// Errc::backward_extrapolation when `t` precedes `dr.t_sent`.
Vec3 extrapolate(const DRVector& dr, TimeMs t);

}  // namespace drsync
