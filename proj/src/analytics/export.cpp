#include "draftcheck/analytics/export.hpp"

#include <fmt/format.h>

namespace draftcheck::analytics {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string number(double v) { return fmt::format("{:.6g}", v); }

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : ""; }

ordered_json optional_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <typename Value>
ordered_json pairs_json(const std::map<std::size_t, Value>& histogram) {
  auto out = ordered_json::array();
  for (const auto& [bucket, value] : histogram) out.push_back({{"bucket", bucket}, {"value", value}});
  return out;
}

}  // namespace

std::string funnel_csv(const FunnelStats& s) {
  std::string out = "stage,count,attrition\n";
  out += fmt::format("submitted,{},\n", s.submitted);
  out += fmt::format("used,{},{}\n", s.used, optional_number(s.attrition[0]));
  out += fmt::format("interacted,{},{}\n", s.interacted, optional_number(s.attrition[1]));
  out += fmt::format("corrected,{},{}\n", s.corrected, optional_number(s.attrition[2]));
  return out;
}

ordered_json funnel_json(const FunnelStats& s) {
  return {
      {"round_id", s.round_id},
      {"submitted", s.submitted},
      {"used", s.used},
      {"interacted", s.interacted},
      {"corrected", s.corrected},
      {"attrition",
       {{"used", optional_json(s.attrition[0])},
        {"interacted", optional_json(s.attrition[1])},
        {"corrected", optional_json(s.attrition[2])}}},
      {"used_without_submitting", s.used_without_submitting},
  };
}

std::string histogram_csv(const std::map<std::size_t, double>& histogram) {
  std::string out = "bucket,value\n";
  for (const auto& [bucket, value] : histogram) out += fmt::format("{},{}\n", bucket, number(value));
  return out;
}

std::string histogram_csv(const std::map<std::size_t, std::size_t>& histogram) {
  std::string out = "bucket,value\n";
  for (const auto& [bucket, value] : histogram) out += fmt::format("{},{}\n", bucket, value);
  return out;
}

ordered_json histogram_json(const std::map<std::size_t, double>& h) { return pairs_json(h); }
ordered_json histogram_json(const std::map<std::size_t, std::size_t>& h) { return pairs_json(h); }

std::string tasks_csv(const TaskDistribution& dist) {
  std::map<std::string, std::string_view> flags;
  for (const auto& o : dist.outliers) flags[o.student_id] = to_string(o.reason);
  std::string out = "student_id,task_count,outlier\n";
  for (const auto& [student, count] : dist.per_student_task_count) {
    const auto it = flags.find(student);
    out += fmt::format("{},{},{}\n", student, count, it == flags.end() ? "" : it->second);
  }
  return out;
}

ordered_json tasks_json(const TaskDistribution& dist) {
  auto per_student = ordered_json::object();
  for (const auto& [student, count] : dist.per_student_task_count) per_student[student] = count;
  auto outliers = ordered_json::array();
  for (const auto& o : dist.outliers) {
    outliers.push_back(
        {{"student_id", o.student_id}, {"count", o.count}, {"reason", std::string(to_string(o.reason))}});
  }
  return {
      {"round_id", dist.round_id},
      {"per_student_task_count", per_student},
      {"histogram", pairs_json(dist.histogram)},
      {"outliers", outliers},
      {"uncovered", dist.uncovered},
  };
}

std::string categories_csv(const CategoryDistribution& dist) {
  std::string out = "student_id,category_count\n";
  for (const auto& [student, count] : dist.per_student_category_count) {
    out += fmt::format("{},{}\n", student, count);
  }
  return out;
}

ordered_json categories_json(const CategoryDistribution& dist) {
  auto per_student = ordered_json::object();
  for (const auto& [student, count] : dist.per_student_category_count) per_student[student] = count;
  return {
      {"round_id", dist.round_id},
      {"per_student_category_count", per_student},
      {"histogram", pairs_json(dist.histogram)},
      {"uncovered", dist.uncovered},
  };
}

}  // namespace draftcheck::analytics
