#pragma once

#include <string>
#include <string_view>

#include "draftcheck/core/types.hpp"

namespace draftcheck {

// Verbatim system prompt for the given version.
std::string_view system_prompt(PromptVersion version);

// System prompt followed by the draft in a delimited section. Validates the draft text first.
std::string build_prompt(PromptVersion version, const ReportDraft& draft);

inline constexpr std::string_view kDraftBeginMarker = "=== STUDENT REPORT BEGIN ===";
inline constexpr std::string_view kDraftEndMarker = "=== STUDENT REPORT END ===";

}  // namespace draftcheck
