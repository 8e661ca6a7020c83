#include "draftcheck/core/text.hpp"

#include <cstdint>

#include "draftcheck/core/errors.hpp"
#include "draftcheck/core/types.hpp"

namespace draftcheck {

DraftTooLong::DraftTooLong(std::size_t actual)
    : DraftError("draft has " + std::to_string(actual) + " characters, limit is " +
                 std::to_string(kMaxDraftChars)),
      actual_length(actual) {}

InvalidEncoding::InvalidEncoding(std::size_t offset)
    : DraftError("invalid UTF-8 at byte " + std::to_string(offset)), byte_offset(offset) {}

SchemaViolation::SchemaViolation(std::optional<std::size_t> idx, std::string f, std::string r)
    : std::runtime_error("schema violation" +
                         (idx ? " at tasks[" + std::to_string(*idx) + "]" : std::string()) +
                         " field " + f + ": " + r),
      index(idx),
      field(std::move(f)),
      reason(std::move(r)) {}

std::size_t utf8_length(std::string_view text) {
  std::size_t count = 0;
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<std::uint8_t>(text[k]); };
  while (i < text.size()) {
    const std::uint8_t lead = byte(i);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
      cp = lead & 0x07;
    } else {
      throw InvalidEncoding(i);
    }
    if (i + len > text.size()) throw InvalidEncoding(i);
    for (std::size_t k = 1; k < len; ++k) {
      const std::uint8_t cont = byte(i + k);
      if ((cont & 0xC0) != 0x80) throw InvalidEncoding(i);
      cp = (cp << 6) | (cont & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) throw InvalidEncoding(i);
    i += len;
    ++count;
  }
  return count;
}

void validate_draft_text(std::string_view text) {
  if (text.empty()) throw EmptyDraft();
  const std::size_t n = utf8_length(text);
  if (n > kMaxDraftChars) throw DraftTooLong(n);
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

}  // namespace draftcheck
