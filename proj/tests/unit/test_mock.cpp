#include <doctest.h>

#include "draftcheck/core/feedback_table.hpp"
#include "draftcheck/mock/mock_provider.hpp"

using namespace draftcheck;
using namespace draftcheck::mock;

namespace {

TaskItem eval(std::string_view line, PromptVersion v) {
  const auto lines = parse_structured_draft(line);
  REQUIRE(lines.size() == 1);
  return evaluate_line(lines[0], v);
}

}  // namespace

TEST_CASE("structured draft parsing") {
  const auto lines = parse_structured_draft(
      "Intro text is ignored.\n"
      "- wrote the intro (evidence: report section 1) (category: Writing)\n"
      "  - indented item (in progress)\n"
      "* not a task\n"
      "-\n"
      "- calibrated (the) sensor (evidence: table 3 (appendix))\n");
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].description == "wrote the intro");
  CHECK(lines[0].evidence == "report section 1");
  CHECK(lines[0].category_hint == TaskCategory::Writing);
  CHECK_FALSE(lines[0].malformed);
  CHECK(lines[1].description == "indented item");
  CHECK(lines[1].in_progress);
  CHECK_FALSE(lines[1].evidence.has_value());
  CHECK(lines[2].malformed);  // empty description
  CHECK(lines[3].description == "calibrated (the) sensor");
  CHECK(lines[3].evidence == "table 3 (appendix)");
}

TEST_CASE("clause order is free and repeated clauses are malformed") {
  const auto a = parse_structured_draft("- built the rig (category: study) (evidence: code)")[0];
  CHECK(a.description == "built the rig");
  CHECK(a.evidence == "code");
  CHECK(a.category_hint == TaskCategory::Study);
  CHECK(parse_structured_draft("- built the rig (evidence: a) (evidence: b)")[0].malformed);
  CHECK(parse_structured_draft("- built the rig (category: cooking)")[0].malformed);
  CHECK_FALSE(parse_structured_draft("- built the rig (evidence:   )")[0].evidence.has_value());
}

TEST_CASE("unauthored beats vague beats evidence") {
  auto t = eval("- we did it", PromptVersion::V1);
  CHECK(t.status == TaskStatus::Error);
  CHECK(t.task == "we did it (Unauthored task)");
  CHECK(t.evidence == kNoEvidenceSentinel);

  t = eval("- helped Ana (evidence: code)", PromptVersion::V2);
  CHECK(t.task == "helped Ana (Unauthored task: mention only your own actions)");
  CHECK(t.evidence == "code");

  t = eval("- coded stuff", PromptVersion::V1);
  CHECK(t.task == "Vague task");
  t = eval("- coded stuff (evidence: code)", PromptVersion::V2);
  CHECK(t.task == "(Vague task: be specific about what was done)");
  CHECK(t.status == TaskStatus::Error);
}

TEST_CASE("v1 requires a material keyword in the evidence, v2 does not") {
  auto t = eval("- studied the control theory book (evidence: chapter 4 of Ogata)", PromptVersion::V1);
  CHECK(t.status == TaskStatus::Error);
  CHECK(t.evidence == kNoEvidenceSentinel);
  t = eval("- studied the control theory book (evidence: chapter 4 of Ogata)", PromptVersion::V2);
  CHECK(t.status == TaskStatus::Ok);
  CHECK(t.evidence == "chapter 4 of Ogata");
  t = eval("- studied the control theory book (evidence: summary TEXT on drive)", PromptVersion::V1);
  CHECK(t.status == TaskStatus::Ok);
}

TEST_CASE("in progress only under v2 and only without evidence") {
  auto t = eval("- assembling the second chassis (in progress)", PromptVersion::V2);
  CHECK(t.status == TaskStatus::InProgress);
  CHECK(t.evidence == kInProgressSentinel);
  t = eval("- assembling the second chassis (in progress)", PromptVersion::V1);
  CHECK(t.status == TaskStatus::Error);
  t = eval("- assembling the second chassis (evidence: photo) (in progress)", PromptVersion::V2);
  CHECK(t.status == TaskStatus::Ok);
}

TEST_CASE("category inference uses the first matching keyword row") {
  CHECK(infer_category("tested the report generator") == TaskCategory::Study);
  CHECK(infer_category("developed the web report") == TaskCategory::Implementation);
  CHECK(infer_category("wrote the manual") == TaskCategory::Writing);
  CHECK(infer_category("scheduled the review") == TaskCategory::Organization);
  CHECK(infer_category("attended the kickoff meeting") == TaskCategory::Meeting);
  CHECK(infer_category("soldered the board") == TaskCategory::Implementation);
  CHECK(eval("- soldered the board (category: Meeting) (evidence: x)", PromptVersion::V2).category ==
        TaskCategory::Meeting);
  CHECK_FALSE(eval("- soldered the board (evidence: code)", PromptVersion::V1).category.has_value());
}

TEST_CASE("mock output is parseable and keeps line order") {
  const ReportDraft draft{"- wrote chapter two (evidence: report)\n- coded stuff\n", "s1", "r1", {}};
  for (auto v : {PromptVersion::V1, PromptVersion::V2}) {
    const auto raw = mock_feedback(draft, v);
    const auto table = parse_feedback(raw, v, std::string(kMockProviderId));
    REQUIRE(table.tasks.size() == 2);
    CHECK(table.tasks[0].task == "wrote chapter two");
    CHECK(error_count(table) == 1);
    CHECK(serialize_table(table) == raw);
  }
  CHECK(mock_feedback({"no list items here", "s1", "r1", {}}, PromptVersion::V1) == R"({"tasks": []})");
}
