#include "draftcheck/mock/mock_provider.hpp"

#include <array>
#include <utility>

#include "draftcheck/core/feedback_table.hpp"
#include "draftcheck/core/text.hpp"

namespace draftcheck::mock {
namespace {

// Frozen rule constants. Changing any of these changes the golden outputs.
constexpr std::array<std::string_view, 4> kUnauthoredMarkers = {"we ", "the group", "helped",
                                                                "assisted"};
constexpr std::array<std::string_view, 8> kMaterialKeywords = {
    "http", "code", "report", "table", "text", "drawing", "repository", "reference"};
constexpr std::size_t kMinTaskWords = 3;

struct CategoryKeywords {
  TaskCategory category;
  std::array<std::string_view, 5> stems;
};

// First matching row wins.
constexpr std::array<CategoryKeywords, 5> kCategoryKeywords = {{
    {TaskCategory::Study, {"study", "studi", "research", "test", ""}},
    {TaskCategory::Implementation, {"implement", "develop", "prototype", "assemble", "machin"}},
    {TaskCategory::Writing, {"writ", "wrot", "report", "document", ""}},
    {TaskCategory::Organization, {"organiz", "schedul", "contact", "", ""}},
    {TaskCategory::Meeting, {"meeting", "", "", "", ""}},
}};

constexpr std::string_view kUnauthoredTagV1 = "(Unauthored task)";
constexpr std::string_view kUnauthoredTagV2 = "(Unauthored task: mention only your own actions)";
constexpr std::string_view kVagueTaskV1 = "Vague task";
constexpr std::string_view kVagueTaskV2 = "(Vague task: be specific about what was done)";

bool contains_any(std::string_view haystack_lower, auto const& needles) {
  for (std::string_view n : needles) {
    if (!n.empty() && haystack_lower.find(n) != std::string_view::npos) return true;
  }
  return false;
}

std::size_t word_count(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\r' || c == '\n';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

bool starts_with_ci(std::string_view text, std::string_view prefix) {
  return text.size() >= prefix.size() && to_lower_ascii(text.substr(0, prefix.size())) == prefix;
}

// Index of the '(' matching the ')' at text.back(), or npos.
std::size_t matching_open(std::string_view text) {
  int depth = 0;
  for (std::size_t i = text.size(); i-- > 0;) {
    if (text[i] == ')') ++depth;
    if (text[i] == '(' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

StructuredDraftLine parse_line(std::string_view body) {
  StructuredDraftLine line;
  bool seen_evidence = false;
  bool seen_category = false;
  std::string_view rest = trim(body);
  while (!rest.empty() && rest.back() == ')') {
    const std::size_t open = matching_open(rest);
    if (open == std::string_view::npos) break;
    const std::string_view clause = trim(rest.substr(open + 1, rest.size() - open - 2));
    if (starts_with_ci(clause, "evidence:")) {
      if (seen_evidence) line.malformed = true;
      seen_evidence = true;
      const std::string_view text = trim(clause.substr(9));
      if (!text.empty()) line.evidence = std::string(text);
    } else if (starts_with_ci(clause, "category:")) {
      if (seen_category) line.malformed = true;
      seen_category = true;
      line.category_hint = parse_category(clause.substr(9));
      if (!line.category_hint) line.malformed = true;
    } else if (to_lower_ascii(clause) == "in progress") {
      if (line.in_progress) line.malformed = true;
      line.in_progress = true;
    } else {
      break;
    }
    rest = trim(rest.substr(0, open));
  }
  line.description = std::string(rest);
  if (line.description.empty()) line.malformed = true;
  return line;
}

}  // namespace

std::vector<StructuredDraftLine> parse_structured_draft(std::string_view text) {
  std::vector<StructuredDraftLine> lines;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    // Leading indentation is allowed so nested markdown lists still count.
    while (!raw.empty() && (raw.front() == ' ' || raw.front() == '\t')) raw.remove_prefix(1);
    if (raw.empty() || raw.front() != '-') continue;
    lines.push_back(parse_line(raw.substr(1)));
  }
  return lines;
}

TaskCategory infer_category(std::string_view description) {
  const std::string lower = to_lower_ascii(description);
  for (const auto& row : kCategoryKeywords) {
    if (contains_any(lower, row.stems)) return row.category;
  }
  return TaskCategory::Implementation;
}

TaskItem evaluate_line(const StructuredDraftLine& line, PromptVersion version) {
  const bool v2 = version == PromptVersion::V2;
  const std::string lower = to_lower_ascii(line.description);

  bool evidence_valid = line.evidence.has_value();
  if (evidence_valid && !v2) {
    evidence_valid = contains_any(to_lower_ascii(*line.evidence), kMaterialKeywords);
  }

  TaskItem item;
  if (v2) item.category = line.category_hint ? *line.category_hint : infer_category(line.description);
  item.evidence = evidence_valid ? *line.evidence : std::string(kNoEvidenceSentinel);

  if (!line.malformed && contains_any(lower, kUnauthoredMarkers)) {
    item.task = line.description + " " + std::string(v2 ? kUnauthoredTagV2 : kUnauthoredTagV1);
    item.status = TaskStatus::Error;
  } else if (line.malformed || word_count(line.description) < kMinTaskWords) {
    item.task = std::string(v2 ? kVagueTaskV2 : kVagueTaskV1);
    item.status = TaskStatus::Error;
  } else if (!evidence_valid) {
    item.task = line.description;
    if (v2 && line.in_progress && !line.evidence) {
      item.status = TaskStatus::InProgress;
      item.evidence = std::string(kInProgressSentinel);
    } else {
      item.status = TaskStatus::Error;
    }
  } else {
    item.task = line.description;
    item.status = TaskStatus::Ok;
  }
  return item;
}

std::string mock_feedback(const ReportDraft& draft, PromptVersion version) {
  FeedbackTable table;
  table.prompt_version = version;
  table.provider_id = std::string(kMockProviderId);
  for (const auto& line : parse_structured_draft(draft.text)) {
    table.tasks.push_back(evaluate_line(line, version));
  }
  return serialize_table(table);
}

}  // namespace draftcheck::mock
