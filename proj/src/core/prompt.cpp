#include "draftcheck/core/prompt.hpp"

#include "draftcheck/core/text.hpp"

namespace draftcheck {
namespace {

constexpr std::string_view kPromptV1 = R"PROMPT(You have the task of analyzing a report from an engineering student. This report comprises a biweekly summary of the activities carried out by the student. Your task is to identify the tasks performed by the student and the material evidence the student claims to have produced. We would like the report to always include, as content, the actions and tasks carried out by the student, as well as evidence showing that the task was performed. The evidence must be a reference to some material produced by the student, such as a code, a report, a link, etc., that can be accessed. A study or research is not valid evidence. References to texts and tables are valid evidence.

Return your response in the following JSON format:

{
  "tasks": [
    {
      "Task": "Description of task 1",
      "Evidence": "Evidence of task 1",
      "Status": "OK"
    },
    {
      "Task": "Description of task 2",
      "Evidence": "Evidence of task 2",
      "Status": "OK"
    },
    {
      "Task": "Description of task N",
      "Evidence": "Evidence of task N",
      "Status": "OK"
    }
  ]
}
The task is to find information, not to interpret the text.

If you cannot identify any tasks, return an empty list.

If you cannot identify evidence (a link or a reference to some material) for any task, or if the evidence is not a link or a reference to material produced by the student, mark the field "Evidence" as "No evidence could be identified" and mark the status as "ERROR."

If any task is vague, mark the field "Task" as "Vague task" and mark the status as "ERROR."

If any task is identified without the authorship of the student, such as "I helped," "I participated," "I assisted," mark the field "Task" with the description of the task and add the tag "(Unauthored task)" and mark the status as "ERROR.")PROMPT";

constexpr std::string_view kPromptV2 = R"PROMPT(You have the task of analyzing a report from an engineering student. This report consists of a biweekly summary of activities carried out by the student. Your task is to identify the tasks performed by the student and the material evidence the student claims to have produced.

Return your response in a JSON format as follows:

{
  "tasks": [
    {
      "Task": "Description of task 1",
      "Evidence": "Evidence of task 1",
      "Category": "Category of task 1",
      "Status": "OK"
    },
    {
      "Task": "Description of task 2",
      "Evidence": "Evidence of task 2",
      "Category": "Category of task 2",
      "Status": "OK"
    },
    {
      "Task": "Description of task N",
      "Evidence": "Evidence of task N",
      "Category": "Category of task N",
      "Status": "OK"
    }
  ]
}

The task is solely to find information and not to interpret the text.

If the task involves studying, research, or initial testing, mark the category as "Study."

If the task involves implementation, development, prototyping, machining, assembling, etc., mark the category as "Implementation."

If the task involves writing reports, mark the category as "Writing."

If the task involves organizing the group, contacting people, scheduling meetings, etc., mark the category as "Organization."

If the task involves attending meetings, mark the category as "Meeting."

For "study"-type tasks, valid evidence includes links to materials produced by the student, direct mentions of what was learned in the study, or the results of the tests. For "implementation"-type tasks, valid evidence includes links or mentions of codes, prototypes, assemblies, etc. For "writing"-type tasks, valid evidence includes links or mentions of reports, texts, repositories, etc. For "organization"-type tasks, valid evidence includes links or mentions of meeting minutes, decisions made, messages sent, etc. For "meeting"-type tasks, valid evidence sought includes decisions made during the meetings, direct mentions of what was discussed, or direct mentions of what was presented by the student.

If a task has no evidence, mark the status as "ERROR" and the evidence as "No evidence could be identified."

If a task is still in progress, mark the status as "IN PROGRESS" and the evidence as "Task in progress."

If no tasks can be identified, return an empty list.

If any task is vague, meaning it is not possible to identify what was done by the student, mark the field "Task" as "(Vague task: be specific about what was done)" and mark the status as "ERROR."

If any task is identified without being authored by the student, or is attributed to the group as a whole ("we did," "the group did," "member X, Y, Z did"), or is attributed as "I helped" or "I assisted," mark the "Task" field with the description of the task but add the tag "(Unauthored task: mention only your own actions)" and mark the status as "ERROR.")PROMPT";

}  // namespace

std::string_view system_prompt(PromptVersion version) {
  return version == PromptVersion::V1 ? kPromptV1 : kPromptV2;
}

std::string build_prompt(PromptVersion version, const ReportDraft& draft) {
  validate_draft_text(draft.text);
  std::string out(system_prompt(version));
  out += "\n\n";
  out += kDraftBeginMarker;
  out += '\n';
  out += draft.text;
  out += '\n';
  out += kDraftEndMarker;
  out += '\n';
  return out;
}

}  // namespace draftcheck
