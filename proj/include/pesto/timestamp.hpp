#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace pesto {

/// UTC instant at one-second resolution, the granularity GitHub reports.
using Timestamp = std::chrono::sys_seconds;

/// Parses an RFC 3339 timestamp ("2020-01-01T00:00:00Z", fractional seconds
/// and numeric offsets accepted). Throws std::invalid_argument.
Timestamp parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);

/// (to - from) in fractional days; negative when to precedes from.
double days_between(Timestamp from, Timestamp to);

Timestamp now_utc();

} // namespace pesto
