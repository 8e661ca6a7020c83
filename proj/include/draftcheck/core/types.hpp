#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace draftcheck {

// Maximum report length, counted in Unicode scalar values.
inline constexpr std::size_t kMaxDraftChars = 2100;

inline constexpr std::string_view kNoEvidenceSentinel = "No evidence could be identified";
inline constexpr std::string_view kInProgressSentinel = "Task in progress";

enum class PromptVersion { V1, V2 };

enum class TaskStatus { Ok, Error, InProgress };

enum class TaskCategory { Study, Implementation, Writing, Organization, Meeting };

inline constexpr TaskCategory kAllCategories[] = {
    TaskCategory::Study, TaskCategory::Implementation, TaskCategory::Writing,
    TaskCategory::Organization, TaskCategory::Meeting};

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

struct TaskItem {
  std::string task;
  std::string evidence;
  std::optional<TaskCategory> category;
  TaskStatus status{TaskStatus::Ok};

  friend bool operator==(const TaskItem&, const TaskItem&) = default;
};

struct FeedbackTable {
  std::vector<TaskItem> tasks;
  PromptVersion prompt_version{PromptVersion::V1};
  std::string provider_id;
  std::string raw_response;

  friend bool operator==(const FeedbackTable&, const FeedbackTable&) = default;
};

struct ReportDraft {
  std::string text;
  std::string student_id;
  std::string round_id;
  Timestamp created_at{};
};

// Canonical display forms: "OK", "ERROR", "IN PROGRESS".
std::string_view to_string(TaskStatus status);
// "Study", "Implementation", ...
std::string_view to_string(TaskCategory category);
// "v1" / "v2"
std::string_view to_string(PromptVersion version);

// Lenient input matching. Returns nullopt for unknown values.
std::optional<TaskStatus> parse_status(std::string_view text);
std::optional<TaskCategory> parse_category(std::string_view text);
std::optional<PromptVersion> parse_prompt_version(std::string_view text);

}  // namespace draftcheck
