#include "drsync/error.hpp"

namespace drsync {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::backward_extrapolation: return "backward extrapolation";
    case Errc::out_of_range: return "out of range";
    case Errc::clock: return "clock error";
    case Errc::alignment: return "alignment error";
    case Errc::input: return "input error";
    case Errc::empty_input: return "empty input";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::undefined_correlation: return "undefined correlation";
    case Errc::lag_range: return "lag out of range";
    case Errc::lookup: return "lookup error";
    case Errc::degenerate_data: return "degenerate data";
    case Errc::validation: return "validation error";
    case Errc::io: return "I/O error";
  }
  return "unknown error";
}

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::string msg = "invalid configuration:";
  for (const auto& v : violations) msg += "\n  - " + v;
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(Errc::validation, join_violations(violations)), violations_(std::move(violations)) {}

}  // namespace drsync
