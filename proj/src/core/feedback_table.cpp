#include "draftcheck/core/feedback_table.hpp"

#include <algorithm>
#include <optional>

#include "draftcheck/core/errors.hpp"
#include "draftcheck/core/text.hpp"

namespace draftcheck {
namespace {

// End offset (one past the closing brace) of the balanced object starting at `open`,
// honoring string literals and escapes. nullopt when the braces never balance.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

const std::string& required_string(const nlohmann::json& obj, std::size_t index,
                                   const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw SchemaViolation(index, field, "missing field");
  if (!it->is_string()) throw SchemaViolation(index, field, "expected a string");
  const auto& value = it->get_ref<const std::string&>();
  if (trim(value).empty()) throw SchemaViolation(index, field, "empty value");
  return value;
}

// Strips a trailing period and compares case-insensitively; the prompts quote the sentinels
// inside sentences ("No evidence could be identified.").
bool matches_sentinel(std::string_view value, std::string_view sentinel) {
  value = trim(value);
  while (!value.empty() && value.back() == '.') value.remove_suffix(1);
  return to_lower_ascii(value) == to_lower_ascii(sentinel);
}

TaskItem task_from_json(const nlohmann::json& obj, std::size_t index, PromptVersion version) {
  if (!obj.is_object()) throw SchemaViolation(index, "tasks", "element is not an object");
  TaskItem item;
  item.task = required_string(obj, index, "Task");
  item.evidence = required_string(obj, index, "Evidence");

  const std::string& status_text = required_string(obj, index, "Status");
  const auto status = parse_status(status_text);
  if (!status) throw SchemaViolation(index, "Status", "unknown value \"" + status_text + "\"");
  if (*status == TaskStatus::InProgress && version == PromptVersion::V1) {
    throw SchemaViolation(index, "Status", "IN PROGRESS is not allowed under prompt v1");
  }
  item.status = *status;

  if (version == PromptVersion::V1) {
    if (obj.contains("Category")) {
      throw SchemaViolation(index, "Category", "category is not allowed under prompt v1");
    }
  } else {
    const std::string& category_text = required_string(obj, index, "Category");
    const auto category = parse_category(category_text);
    if (!category) {
      throw SchemaViolation(index, "Category", "unknown value \"" + category_text + "\"");
    }
    item.category = *category;
  }

  if (item.status == TaskStatus::InProgress) {
    item.evidence = std::string(kInProgressSentinel);
  } else if (matches_sentinel(item.evidence, kNoEvidenceSentinel)) {
    item.evidence = std::string(kNoEvidenceSentinel);
  }
  return item;
}

}  // namespace

std::vector<TaskItem> tasks_from_json(const nlohmann::json& payload, PromptVersion version) {
  if (!payload.is_object()) throw SchemaViolation(std::nullopt, "tasks", "payload is not an object");
  const auto it = payload.find("tasks");
  if (it == payload.end()) throw SchemaViolation(std::nullopt, "tasks", "missing field");
  if (!it->is_array()) throw SchemaViolation(std::nullopt, "tasks", "expected an array");
  std::vector<TaskItem> tasks;
  tasks.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    tasks.push_back(task_from_json((*it)[i], i, version));
  }
  return tasks;
}

FeedbackTable parse_feedback(std::string_view raw, PromptVersion version, std::string provider_id) {
  for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
    const auto end = balanced_end(raw, pos);
    if (!end) continue;
    auto candidate = nlohmann::json::parse(raw.substr(pos, *end - pos), nullptr, false);
    if (candidate.is_discarded() || !candidate.is_object() || !candidate.contains("tasks")) {
      continue;
    }
    FeedbackTable table;
    table.tasks = tasks_from_json(candidate, version);
    table.prompt_version = version;
    table.provider_id = std::move(provider_id);
    table.raw_response = std::string(raw);
    return table;
  }
  throw NoJsonFound();
}

nlohmann::ordered_json tasks_to_json(const std::vector<TaskItem>& tasks) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& t : tasks) {
    nlohmann::ordered_json obj;
    obj["Task"] = t.task;
    obj["Evidence"] = t.evidence;
    if (t.category) obj["Category"] = std::string(to_string(*t.category));
    obj["Status"] = std::string(to_string(t.status));
    out.push_back(std::move(obj));
  }
  return out;
}

std::string serialize_table(const FeedbackTable& table) {
  if (table.tasks.empty()) return R"({"tasks": []})";
  const auto quoted = [](const std::string& s) { return nlohmann::json(s).dump(); };
  std::string out = "{\"tasks\": [\n";
  for (std::size_t i = 0; i < table.tasks.size(); ++i) {
    const TaskItem& t = table.tasks[i];
    out += "  {\"Task\": " + quoted(t.task) + ", \"Evidence\": " + quoted(t.evidence);
    if (t.category) out += ", \"Category\": " + quoted(std::string(to_string(*t.category)));
    out += ", \"Status\": " + quoted(std::string(to_string(t.status))) + "}";
    out += i + 1 < table.tasks.size() ? ",\n" : "\n";
  }
  out += "]}";
  return out;
}

std::size_t error_count(const std::vector<TaskItem>& tasks) {
  return static_cast<std::size_t>(std::count_if(tasks.begin(), tasks.end(), [](const TaskItem& t) {
    return t.status == TaskStatus::Error;
  }));
}

std::size_t error_count(const FeedbackTable& table) { return error_count(table.tasks); }

}  // namespace draftcheck
