#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace tracefix {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

// Parses ISO-8601 dates and date-times: "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS[.f+]]"
// with optional "Z" or "+HH:MM"/"-HH:MM" offset. A space may replace the 'T'.
// Returns nullopt when the text is not a valid instant.
std::optional<Timestamp> parse_iso8601(std::string_view text);

// UTC rendering with microsecond precision, e.g. "2012-01-05T10:00:00.000000Z".
std::string format_iso8601(Timestamp ts);

}  // namespace tracefix
