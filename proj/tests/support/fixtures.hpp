#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

#include "draftcheck/core/feedback_table.hpp"
#include "draftcheck/store/interaction_record.hpp"

namespace fixtures {

using namespace draftcheck;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("draftcheck-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Timestamp at_minute(int minute) {
  using namespace std::chrono;
  return sys_days{year{2025} / March / 3} + minutes{minute};
}

inline std::string random_text(std::mt19937_64& rng) {
  // Mix of ASCII, quotes, backslashes, newlines and multi-byte characters to stress escaping.
  static const std::vector<std::string> pieces = {
      "wrote", "the", "motor", "driver", " ", "\"quoted\"", "\\", "\n", "\t", "ção", "ü",
      "{", "}", "[", "]", ":", ",", "http://x.example/a?b=1", "日本", "😀", "0"};
  std::string out;
  const auto n = 1 + rng() % 8;
  for (std::size_t i = 0; i < n; ++i) out += pieces[rng() % pieces.size()];
  // Fields must not be blank.
  if (out.find_first_not_of(" \t\n") == std::string::npos) out += "x";
  return out;
}

inline FeedbackTable random_table(std::mt19937_64& rng, PromptVersion version) {
  FeedbackTable t;
  t.prompt_version = version;
  t.provider_id = "test";
  const auto n = rng() % 10;
  for (std::size_t i = 0; i < n; ++i) {
    TaskItem item;
    item.task = random_text(rng);
    const int statuses = version == PromptVersion::V2 ? 3 : 2;
    item.status = static_cast<TaskStatus>(rng() % statuses);
    switch (rng() % 3) {
      case 0: item.evidence = std::string(kNoEvidenceSentinel); break;
      default: item.evidence = random_text(rng);
    }
    if (item.status == TaskStatus::InProgress) item.evidence = std::string(kInProgressSentinel);
    if (version == PromptVersion::V2) item.category = kAllCategories[rng() % std::size(kAllCategories)];
    t.tasks.push_back(std::move(item));
  }
  t.raw_response = serialize_table(t);
  return t;
}

// Table with `tasks` rows of which the first `errors` are ERROR.
inline FeedbackTable table_with(std::size_t tasks, std::size_t errors,
                                PromptVersion version = PromptVersion::V1,
                                std::vector<TaskCategory> categories = {}) {
  FeedbackTable t;
  t.prompt_version = version;
  t.provider_id = "fixture";
  for (std::size_t i = 0; i < tasks; ++i) {
    TaskItem item;
    item.task = "task number " + std::to_string(i);
    item.evidence = i < errors ? std::string(kNoEvidenceSentinel) : "code in the repository";
    item.status = i < errors ? TaskStatus::Error : TaskStatus::Ok;
    if (version == PromptVersion::V2) {
      item.category = categories.empty() ? TaskCategory::Implementation : categories[i % categories.size()];
    }
    t.tasks.push_back(std::move(item));
  }
  t.raw_response = serialize_table(t);
  return t;
}

inline InteractionRecord request(const std::string& student, const std::string& round, int minute,
                                 FeedbackTable table) {
  InteractionRecord r;
  r.student_id = student;
  r.round_id = round;
  r.kind = InteractionKind::FeedbackRequest;
  r.draft_text = "draft of " + student;
  r.error_count = error_count(table);
  r.table = std::move(table);
  r.timestamp = at_minute(minute);
  return r;
}

inline InteractionRecord request_errors(const std::string& student, const std::string& round,
                                        int minute, std::size_t errors) {
  return request(student, round, minute, table_with(std::max<std::size_t>(errors, 4), errors));
}

inline InteractionRecord failed_request(const std::string& student, const std::string& round,
                                        int minute) {
  InteractionRecord r;
  r.student_id = student;
  r.round_id = round;
  r.kind = InteractionKind::FeedbackRequest;
  r.draft_text = "draft of " + student;
  r.failure = ProviderFailure{"ProviderUnavailable", "stub down", PromptVersion::V1, "fixture", std::nullopt};
  r.timestamp = at_minute(minute);
  return r;
}

inline InteractionRecord submission(const std::string& student, const std::string& round, int minute) {
  InteractionRecord r;
  r.student_id = student;
  r.round_id = round;
  r.kind = InteractionKind::FinalSubmission;
  r.draft_text = "final of " + student;
  r.timestamp = at_minute(minute);
  return r;
}

// Straight-line restatement of the funnel definitions, kept deliberately naive so it can serve
// as an independent check on analytics::compute_funnel.
struct OracleFunnel {
  std::size_t submitted{0}, used{0}, interacted{0}, corrected{0};
};

inline OracleFunnel oracle_funnel(const std::vector<InteractionRecord>& records, const std::string& round) {
  std::set<std::string> submitters;
  std::map<std::string, std::vector<const InteractionRecord*>> requests;
  for (const auto& r : records) {
    if (r.round_id != round) continue;
    if (r.kind == InteractionKind::FinalSubmission) submitters.insert(r.student_id);
    if (r.kind == InteractionKind::FeedbackRequest) requests[r.student_id].push_back(&r);
  }
  OracleFunnel f;
  for (const auto& s : submitters) {
    ++f.submitted;
    auto it = requests.find(s);
    if (it == requests.end()) continue;
    auto reqs = it->second;
    ++f.used;
    if (reqs.size() < 2) continue;
    ++f.interacted;
    std::stable_sort(reqs.begin(), reqs.end(),
                     [](auto* a, auto* b) { return a->timestamp < b->timestamp; });
    std::vector<std::size_t> counts;
    for (auto* r : reqs) {
      if (r->table) counts.push_back(error_count(*r->table));
    }
    if (counts.size() >= 2 && counts.back() < counts.front()) ++f.corrected;
  }
  return f;
}

}  // namespace fixtures
