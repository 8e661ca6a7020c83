#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "draftcheck/store/interaction_record.hpp"

namespace draftcheck::analytics {

struct NormalizationImpossible : std::runtime_error {
  NormalizationImpossible()
      : std::runtime_error("cannot normalize: the round has no submissions") {}
};

struct VersionUnsupported : std::runtime_error {
  explicit VersionUnsupported(const std::string& round_id)
      : std::runtime_error("round " + round_id +
                           " ran prompt v1, which does not categorize tasks") {}
};

// Nested stages: submitted >= used >= interacted >= corrected.
struct FunnelStats {
  std::string round_id;
  std::size_t submitted{0};
  std::size_t used{0};
  std::size_t interacted{0};
  std::size_t corrected{0};
  // 1 - next/previous for submitted->used, used->interacted, interacted->corrected.
  // Absent when the previous stage is empty.
  std::array<std::optional<double>, 3> attrition{};
  // Students who requested feedback but never submitted; outside the funnel.
  std::size_t used_without_submitting{0};

  friend bool operator==(const FunnelStats&, const FunnelStats&) = default;
};

enum class OutlierReason { TooMany, TooFew };
std::string_view to_string(OutlierReason reason);

inline constexpr std::size_t kTooManyTasksAbove = 8;
inline constexpr std::size_t kTooFewTasks = 1;

struct TaskOutlier {
  std::string student_id;
  std::size_t count{0};
  OutlierReason reason{OutlierReason::TooMany};

  friend bool operator==(const TaskOutlier&, const TaskOutlier&) = default;
};

struct TaskDistribution {
  std::string round_id;
  std::map<std::string, std::size_t> per_student_task_count;
  std::map<std::size_t, std::size_t> histogram;  // task count -> students
  std::vector<TaskOutlier> outliers;             // ordered by student id
  std::vector<std::string> uncovered;            // submitted, never got a feedback table

  friend bool operator==(const TaskDistribution&, const TaskDistribution&) = default;
};

struct CategoryDistribution {
  std::string round_id;
  std::map<std::string, std::size_t> per_student_category_count;
  std::map<std::size_t, std::size_t> histogram;  // distinct categories -> students
  std::vector<std::string> uncovered;

  friend bool operator==(const CategoryDistribution&, const CategoryDistribution&) = default;
};

// All functions consider only records of `round_id`, ordered by timestamp (ties keep input order).

FunnelStats compute_funnel(std::span<const InteractionRecord> records, const std::string& round_id);

// Students bucketed by their number of feedback requests (zero-use students excluded). The
// normalized form divides by the round's submitted count; throws NormalizationImpossible if zero.
std::map<std::size_t, double> interaction_histogram(std::span<const InteractionRecord> records,
                                                    const std::string& round_id, bool normalized);

// Task counts from each submitted student's last successful feedback table.
TaskDistribution task_distribution(std::span<const InteractionRecord> records,
                                   const std::string& round_id);

// Distinct categories in each submitted student's last successful table. Throws
// VersionUnsupported if `round_version` is V1, or when not given and any table of the round was
// produced under V1.
CategoryDistribution category_distribution(std::span<const InteractionRecord> records,
                                           const std::string& round_id,
                                           std::optional<PromptVersion> round_version = std::nullopt);

std::optional<OutlierReason> classify_task_count(std::size_t count);

}  // namespace draftcheck::analytics
