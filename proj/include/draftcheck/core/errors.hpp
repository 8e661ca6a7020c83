#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace draftcheck {

struct DraftError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyDraft : DraftError {
  EmptyDraft() : DraftError("draft is empty") {}
};

struct DraftTooLong : DraftError {
  std::size_t actual_length;
  explicit DraftTooLong(std::size_t actual);
};

struct InvalidEncoding : DraftError {
  std::size_t byte_offset;
  explicit InvalidEncoding(std::size_t offset);
};

struct NoJsonFound : std::runtime_error {
  NoJsonFound() : std::runtime_error("no JSON object with a \"tasks\" array found in provider output") {}
};

// A payload was found but does not match the table schema of the requested prompt version.
// index is empty for violations at the top level (e.g. "tasks" not an array).
struct SchemaViolation : std::runtime_error {
  std::optional<std::size_t> index;
  std::string field;
  std::string reason;
  SchemaViolation(std::optional<std::size_t> index, std::string field, std::string reason);
};

}  // namespace draftcheck
