#pragma once

#include <string>
#include <string_view>

#include "vssd/types.hpp"

namespace vssd {

/// Parses "3d", "12h", "30m", "45s" or a bare number of seconds.
/// Throws std::invalid_argument on anything else (including negatives).
Duration parse_duration(std::string_view text);

/// Parses an absolute simulated time: "dayN" (N days after the epoch) or
/// anything parse_duration accepts, taken as an offset from the epoch.
Timestamp parse_time(std::string_view text);

/// Renders a duration compactly ("5d", "36h", "90s"); the inverse of
/// parse_duration for values it produces.
std::string format_duration(Duration d);

}  // namespace vssd
