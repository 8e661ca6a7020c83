#include "draftcheck/analytics/analytics.hpp"

#include <algorithm>
#include <set>

#include "draftcheck/core/feedback_table.hpp"

namespace draftcheck::analytics {
namespace {

struct StudentActivity {
  std::size_t submissions{0};
  std::size_t requests{0};
  std::vector<const FeedbackTable*> tables;  // chronological, successful requests only
};

std::map<std::string, StudentActivity> summarize(std::span<const InteractionRecord> records,
                                                 const std::string& round_id) {
  std::vector<const InteractionRecord*> ordered;
  for (const auto& r : records) {
    if (r.round_id == round_id) ordered.push_back(&r);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->timestamp < b->timestamp; });

  std::map<std::string, StudentActivity> students;
  for (const auto* r : ordered) {
    auto& s = students[r->student_id];
    if (r->kind == InteractionKind::FinalSubmission) {
      ++s.submissions;
    } else {
      ++s.requests;
      if (r->table) s.tables.push_back(&*r->table);
    }
  }
  return students;
}

std::optional<double> attrition(std::size_t previous, std::size_t next) {
  if (previous == 0) return std::nullopt;
  return 1.0 - static_cast<double>(next) / static_cast<double>(previous);
}

}  // namespace

std::string_view to_string(OutlierReason reason) {
  return reason == OutlierReason::TooMany ? "TooMany" : "TooFew";
}

std::optional<OutlierReason> classify_task_count(std::size_t count) {
  if (count > kTooManyTasksAbove) return OutlierReason::TooMany;
  if (count == kTooFewTasks) return OutlierReason::TooFew;
  return std::nullopt;
}

FunnelStats compute_funnel(std::span<const InteractionRecord> records, const std::string& round_id) {
  FunnelStats stats;
  stats.round_id = round_id;
  for (const auto& [student, s] : summarize(records, round_id)) {
    if (s.submissions == 0) {
      if (s.requests > 0) ++stats.used_without_submitting;
      continue;
    }
    ++stats.submitted;
    if (s.requests < 1) continue;
    ++stats.used;
    if (s.requests < 2) continue;
    ++stats.interacted;
    // Strictly fewer errors on the last table than on the first.
    if (s.tables.size() >= 2 && error_count(*s.tables.back()) < error_count(*s.tables.front())) {
      ++stats.corrected;
    }
  }
  stats.attrition = {attrition(stats.submitted, stats.used), attrition(stats.used, stats.interacted),
                     attrition(stats.interacted, stats.corrected)};
  return stats;
}

std::map<std::size_t, double> interaction_histogram(std::span<const InteractionRecord> records,
                                                    const std::string& round_id, bool normalized) {
  std::map<std::size_t, double> histogram;
  std::size_t submitted = 0;
  for (const auto& [student, s] : summarize(records, round_id)) {
    if (s.submissions > 0) ++submitted;
    if (s.requests > 0) histogram[s.requests] += 1.0;
  }
  if (normalized) {
    if (submitted == 0) throw NormalizationImpossible();
    for (auto& [bucket, value] : histogram) value /= static_cast<double>(submitted);
  }
  return histogram;
}

TaskDistribution task_distribution(std::span<const InteractionRecord> records,
                                   const std::string& round_id) {
  TaskDistribution dist;
  dist.round_id = round_id;
  for (const auto& [student, s] : summarize(records, round_id)) {
    if (s.submissions == 0) continue;
    if (s.tables.empty()) {
      dist.uncovered.push_back(student);
      continue;
    }
    const std::size_t count = s.tables.back()->tasks.size();
    dist.per_student_task_count[student] = count;
    ++dist.histogram[count];
    if (const auto reason = classify_task_count(count)) {
      dist.outliers.push_back({student, count, *reason});
    }
  }
  return dist;
}

CategoryDistribution category_distribution(std::span<const InteractionRecord> records,
                                           const std::string& round_id,
                                           std::optional<PromptVersion> round_version) {
  if (round_version == PromptVersion::V1) throw VersionUnsupported(round_id);
  const auto students = summarize(records, round_id);
  if (!round_version) {
    for (const auto& [student, s] : students) {
      for (const auto* t : s.tables) {
        if (t->prompt_version == PromptVersion::V1) throw VersionUnsupported(round_id);
      }
    }
  }

  CategoryDistribution dist;
  dist.round_id = round_id;
  for (const auto& [student, s] : students) {
    if (s.submissions == 0) continue;
    if (s.tables.empty()) {
      dist.uncovered.push_back(student);
      continue;
    }
    std::set<TaskCategory> distinct;
    for (const auto& task : s.tables.back()->tasks) {
      if (task.category) distinct.insert(*task.category);
    }
    dist.per_student_category_count[student] = distinct.size();
    ++dist.histogram[distinct.size()];
  }
  return dist;
}

}  // namespace draftcheck::analytics
