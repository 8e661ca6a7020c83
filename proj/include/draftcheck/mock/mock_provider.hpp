#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "draftcheck/core/types.hpp"

namespace draftcheck::mock {

// Deterministic stand-in for the LLM. Only lines starting with '-' are considered, using the grammar
//
//   - <description> [(evidence: <text>)] [(category: <name>)] [(in progress)]
//
// Clauses are read right to left from the end of the line, so parentheses inside the description
// are kept as description text. A line with an empty description, a repeated clause or an unknown
// category name is malformed and reported as a vague task.
struct StructuredDraftLine {
  std::string description;
  std::optional<std::string> evidence;
  std::optional<TaskCategory> category_hint;
  bool in_progress{false};
  bool malformed{false};
};

std::vector<StructuredDraftLine> parse_structured_draft(std::string_view text);

// Rule priority: unauthored, vague, missing evidence, otherwise OK.
TaskItem evaluate_line(const StructuredDraftLine& line, PromptVersion version);

// Keyword-based category used when a line has no category hint.
TaskCategory infer_category(std::string_view description);

// Canonical JSON table text, as a provider would return it.
std::string mock_feedback(const ReportDraft& draft, PromptVersion version);

inline constexpr std::string_view kMockProviderId = "mock-rules";

}  // namespace draftcheck::mock
