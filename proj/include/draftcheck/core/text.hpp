#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace draftcheck {

// Number of Unicode scalar values in a UTF-8 string. Throws InvalidEncoding on malformed input
// (overlong forms, surrogates and code points above U+10FFFF are rejected).
std::size_t utf8_length(std::string_view text);

// Throws EmptyDraft, InvalidEncoding or DraftTooLong.
void validate_draft_text(std::string_view text);

std::string to_lower_ascii(std::string_view text);
std::string_view trim(std::string_view text);

}  // namespace draftcheck
