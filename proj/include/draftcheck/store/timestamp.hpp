#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "draftcheck/core/types.hpp"

namespace draftcheck {

// "2025-03-03T12:00:00.000Z"
std::string format_rfc3339(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]" followed by "Z" or a "+HH:MM"/"-HH:MM" offset.
// Fractions beyond milliseconds are truncated.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

Timestamp now_utc();

}  // namespace draftcheck
