#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "draftcheck/core/types.hpp"

namespace draftcheck {

// Locates the first balanced {...} block in free text that parses as a JSON object with a
// "tasks" key, and validates it. Surrounding prose and markdown fences are ignored.
// Throws NoJsonFound or SchemaViolation.
FeedbackTable parse_feedback(std::string_view raw, PromptVersion version, std::string provider_id);

// Validates an already-decoded {"tasks": [...]} object. Throws SchemaViolation.
std::vector<TaskItem> tasks_from_json(const nlohmann::json& payload, PromptVersion version);

// Array of task objects with keys in canonical order (Task, Evidence, [Category], Status).
nlohmann::ordered_json tasks_to_json(const std::vector<TaskItem>& tasks);

// Canonical text: `{"tasks": []}` when empty, otherwise one task object per line.
std::string serialize_table(const FeedbackTable& table);

std::size_t error_count(const FeedbackTable& table);
std::size_t error_count(const std::vector<TaskItem>& tasks);

}  // namespace draftcheck
