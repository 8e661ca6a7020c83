#include "draftcheck/core/types.hpp"

#include <string>

#include "draftcheck/core/text.hpp"

namespace draftcheck {
namespace {

// Uppercase, '_' and '-' become spaces, whitespace runs collapse, trailing punctuation dropped.
std::string normalize_token(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(text)) {
    if (c == '_' || c == '-' || c == ' ' || c == '\t') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c);
  }
  while (!out.empty() && std::string_view(". ,;:!").find(out.back()) != std::string_view::npos) {
    out.pop_back();
  }
  return out;
}

}  // namespace

std::string_view to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::Ok: return "OK";
    case TaskStatus::Error: return "ERROR";
    case TaskStatus::InProgress: return "IN PROGRESS";
  }
  return "ERROR";
}

std::string_view to_string(TaskCategory category) {
  switch (category) {
    case TaskCategory::Study: return "Study";
    case TaskCategory::Implementation: return "Implementation";
    case TaskCategory::Writing: return "Writing";
    case TaskCategory::Organization: return "Organization";
    case TaskCategory::Meeting: return "Meeting";
  }
  return "Implementation";
}

std::string_view to_string(PromptVersion version) {
  return version == PromptVersion::V1 ? "v1" : "v2";
}

std::optional<TaskStatus> parse_status(std::string_view text) {
  const std::string token = normalize_token(text);
  if (token == "OK") return TaskStatus::Ok;
  if (token == "ERROR") return TaskStatus::Error;
  if (token == "IN PROGRESS" || token == "INPROGRESS") return TaskStatus::InProgress;
  return std::nullopt;
}

std::optional<TaskCategory> parse_category(std::string_view text) {
  const std::string token = normalize_token(text);
  for (TaskCategory c : kAllCategories) {
    if (token == normalize_token(to_string(c))) return c;
  }
  return std::nullopt;
}

std::optional<PromptVersion> parse_prompt_version(std::string_view text) {
  const std::string token = normalize_token(text);
  if (token == "V1" || token == "1") return PromptVersion::V1;
  if (token == "V2" || token == "2") return PromptVersion::V2;
  return std::nullopt;
}

}  // namespace draftcheck
