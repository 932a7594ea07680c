#pragma once

#include <compare>
#include <cstdint>

namespace drsync {

/// Integer milliseconds since simulation start.
class TimeMs {
 public:
  constexpr TimeMs() = default;
  constexpr explicit TimeMs(std::int64_t ms) : ms_(ms) {}

  constexpr std::int64_t count() const noexcept { return ms_; }

  constexpr auto operator<=>(const TimeMs&) const = default;

  constexpr TimeMs operator+(std::int64_t delta) const { return TimeMs{ms_ + delta}; }
  constexpr TimeMs operator-(std::int64_t delta) const { return TimeMs{ms_ - delta}; }
  constexpr std::int64_t operator-(TimeMs other) const { return ms_ - other.ms_; }
  constexpr TimeMs& operator+=(std::int64_t delta) {
    ms_ += delta;
    return *this;
  }

 private:
  std::int64_t ms_ = 0;
};

}  // namespace drsync
