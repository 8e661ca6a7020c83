#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "draftcheck/core/types.hpp"

namespace draftcheck {

enum class InteractionKind { FeedbackRequest, FinalSubmission };

std::string_view to_string(InteractionKind kind);
std::optional<InteractionKind> parse_interaction_kind(std::string_view text);

// Why a feedback request produced no table.
struct ProviderFailure {
  std::string reason;  // "ProviderUnavailable", "ProviderResponseUnparseable" or "AuthFailure"
  std::string detail;
  PromptVersion prompt_version{PromptVersion::V1};
  std::string provider_id;
  std::optional<std::string> raw_response;

  friend bool operator==(const ProviderFailure&, const ProviderFailure&) = default;
};

struct InteractionRecord {
  std::string record_id;  // assigned by the store on append
  std::string student_id;
  std::string round_id;
  InteractionKind kind{InteractionKind::FeedbackRequest};
  std::string draft_text;
  std::optional<FeedbackTable> table;      // FeedbackRequest that succeeded
  std::optional<std::size_t> error_count;  // present iff table present
  std::optional<ProviderFailure> failure;  // FeedbackRequest that failed
  Timestamp timestamp{};

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

// Lowercase hex SHA-256 of the draft bytes.
std::string sha256_hex(std::string_view data);

// One log line (without the trailing LF). Keys follow the documented line schema.
std::string to_log_line(const InteractionRecord& record);

// Throws std::invalid_argument describing the first problem found.
InteractionRecord from_log_line(std::string_view line);

// Structural checks shared by append and load. Throws std::invalid_argument.
void check_record(const InteractionRecord& record);

// Identifiers become file names and URL segments: [A-Za-z0-9_.@-], not starting with '.', <= 128.
bool is_valid_identifier(std::string_view id);

}  // namespace draftcheck
