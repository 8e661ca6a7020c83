#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "draftcheck/analytics/analytics.hpp"

namespace draftcheck::analytics {

// CSV column schemas:
//   funnel:       stage,count,attrition         (attrition empty for "submitted" or when undefined)
//   histograms:   bucket,value
//   tasks:        student_id,task_count,outlier (outlier empty, TooMany or TooFew)
//   categories:   student_id,category_count
// Every file ends with a newline. Values are written with up to 6 significant decimals.

std::string funnel_csv(const FunnelStats& stats);
nlohmann::ordered_json funnel_json(const FunnelStats& stats);

std::string histogram_csv(const std::map<std::size_t, double>& histogram);
std::string histogram_csv(const std::map<std::size_t, std::size_t>& histogram);
nlohmann::ordered_json histogram_json(const std::map<std::size_t, double>& histogram);
nlohmann::ordered_json histogram_json(const std::map<std::size_t, std::size_t>& histogram);

std::string tasks_csv(const TaskDistribution& dist);
nlohmann::ordered_json tasks_json(const TaskDistribution& dist);

std::string categories_csv(const CategoryDistribution& dist);
nlohmann::ordered_json categories_json(const CategoryDistribution& dist);

}  // namespace draftcheck::analytics
