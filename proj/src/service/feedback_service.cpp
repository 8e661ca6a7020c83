#include "draftcheck/service/feedback_service.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "draftcheck/analytics/analytics.hpp"
#include "draftcheck/analytics/export.hpp"
#include "draftcheck/core/errors.hpp"
#include "draftcheck/core/feedback_table.hpp"
#include "draftcheck/core/text.hpp"
#include "draftcheck/store/timestamp.hpp"

namespace draftcheck::service {
namespace {

using ordered_json = nlohmann::ordered_json;

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
  ApiResponse r;
  r.status = status;
  r.body = {{"error", code}, {"message", message}};
  return r;
}

std::optional<ApiResponse> validate_draft(const std::string& draft) {
  try {
    validate_draft_text(draft);
  } catch (const EmptyDraft& e) {
    return error_response(400, "EmptyDraft", e.what());
  } catch (const DraftTooLong& e) {
    auto r = error_response(400, "DraftTooLong", e.what());
    r.body["actual_length"] = e.actual_length;
    r.body["limit"] = kMaxDraftChars;
    return r;
  } catch (const InvalidEncoding& e) {
    return error_response(400, "InvalidEncoding", e.what());
  }
  return std::nullopt;
}

const InteractionRecord* first_with_table(const std::vector<InteractionRecord>& requests) {
  const auto it = std::find_if(requests.begin(), requests.end(),
                               [](const InteractionRecord& r) { return r.table.has_value(); });
  return it == requests.end() ? nullptr : &*it;
}

}  // namespace

ordered_json table_json(const FeedbackTable& table) {
  return {
      {"tasks", tasks_to_json(table.tasks)},
      {"prompt_version", std::string(to_string(table.prompt_version))},
      {"provider_id", table.provider_id},
      {"raw_response", table.raw_response},
  };
}

FeedbackService::FeedbackService(ServiceConfig config, EventStore& store, ServiceOptions options)
    : config_(std::move(config)), store_(store), clock_(std::move(options.clock)) {
  if (!clock_) clock_ = now_utc;
  for (const auto& [id, round] : config_.rounds) {
    auto provider = options.provider_factory ? options.provider_factory(round.provider)
                                             : gateway::make_provider(round.provider);
    gateways_.emplace(id, std::make_unique<gateway::FeedbackGateway>(
                              round.provider, std::move(provider), options.sleeper,
                              std::hash<std::string>{}(id)));
  }
}

FeedbackService::StudentLocks& FeedbackService::locks_for(const std::string& round_id,
                                                          const std::string& student_id) {
  std::lock_guard lock(locks_mu_);
  auto& slot = locks_[round_id + "/" + student_id];
  if (!slot) slot = std::make_unique<StudentLocks>();
  return *slot;
}

Timestamp FeedbackService::next_timestamp(const std::string& round_id, const std::string& student_id) {
  Timestamp now = clock_();
  if (const auto last = store_.last_timestamp(round_id, student_id)) now = std::max(now, *last);
  return now;
}

std::optional<ApiResponse> FeedbackService::check_access(
    const std::string& round_id, const std::string& student_id,
    const std::optional<std::string>& authenticated_student) {
  if (!config_.rounds.contains(round_id)) {
    return error_response(404, "UnknownRound", "unknown round \"" + round_id + "\"");
  }
  if (!is_valid_identifier(student_id)) {
    return error_response(400, "InvalidStudentId", "invalid student id");
  }
  if (config_.auth_mode == AuthMode::Proxy &&
      (!authenticated_student || *authenticated_student != student_id)) {
    return error_response(403, "Forbidden", "authenticated identity does not match the student");
  }
  return std::nullopt;
}

ApiResponse FeedbackService::store_failure(const std::exception& e) {
  spdlog::error("store write failed: {}", e.what());
  if (dynamic_cast<const StorageFull*>(&e) != nullptr) {
    return error_response(507, "StorageFull", e.what());
  }
  return error_response(500, "StorageError", e.what());
}

ApiResponse FeedbackService::request_feedback(const std::string& round_id,
                                              const std::string& student_id, const std::string& draft,
                                              const std::optional<std::string>& authenticated_student) {
  if (auto denied = check_access(round_id, student_id, authenticated_student)) return *denied;
  const RoundConfig& round = config_.rounds.at(round_id);
  if (!round.is_open(clock_())) return error_response(403, "RoundClosed", "round is not open");
  if (auto invalid = validate_draft(draft)) return *invalid;

  StudentLocks& locks = locks_for(round_id, student_id);
  std::unique_lock in_flight(locks.in_flight, std::try_to_lock);
  if (!in_flight.owns_lock()) {
    return error_response(429, "FeedbackInFlight",
                          "a feedback request for this student is already running");
  }

  ReportDraft report;
  report.text = draft;
  report.student_id = student_id;
  report.round_id = round_id;
  report.created_at = clock_();

  InteractionRecord record;
  record.student_id = student_id;
  record.round_id = round_id;
  record.kind = InteractionKind::FeedbackRequest;
  record.draft_text = draft;

  const auto& provider = round.provider;
  const auto fail = [&](std::string reason, std::string detail, std::optional<std::string> raw) {
    record.failure = ProviderFailure{std::move(reason), std::move(detail), provider.prompt_version,
                                     provider.provider_id(), std::move(raw)};
  };
  try {
    record.table = gateways_.at(round_id)->request_feedback(report);
    record.error_count = error_count(*record.table);
  } catch (const gateway::ProviderResponseUnparseable& e) {
    fail("ProviderResponseUnparseable", e.detail, e.raw_response);
  } catch (const gateway::ProviderUnavailable& e) {
    fail("ProviderUnavailable", e.what(), std::nullopt);
  } catch (const gateway::AuthFailure& e) {
    fail("AuthFailure", e.what(), std::nullopt);
  }

  std::vector<InteractionRecord> requests;
  try {
    std::lock_guard write(locks.write);
    record.timestamp = next_timestamp(round_id, student_id);
    record.record_id = store_.append(record);
    requests = store_.query({round_id, student_id, InteractionKind::FeedbackRequest});
  } catch (const StoreError& e) {
    return store_failure(e);
  }

  const std::size_t attempt_number = requests.size();
  ApiResponse response;
  if (record.failure) {
    spdlog::warn("feedback for {}/{} failed: {} {}", round_id, student_id, record.failure->reason,
                 record.failure->detail);
    response = error_response(502, record.failure->reason, record.failure->detail);
    if (record.failure->raw_response) {
      const auto& raw = *record.failure->raw_response;
      response.body["raw_excerpt"] = raw.size() <= 200 ? raw : raw.substr(0, 200);
    }
    response.body["record_id"] = record.record_id;
    response.body["attempt_number"] = attempt_number;
    return response;
  }

  response.body = {
      {"table", table_json(*record.table)},
      {"error_count", *record.error_count},
      {"attempt_number", attempt_number},
  };
  if (attempt_number > 1) {
    const InteractionRecord* first = first_with_table(requests);
    const auto first_errors = static_cast<long long>(first ? *first->error_count : *record.error_count);
    response.body["delta_vs_first"] = static_cast<long long>(*record.error_count) - first_errors;
  }
  response.body["record_id"] = record.record_id;
  response.body["timestamp"] = format_rfc3339(record.timestamp);
  return response;
}

ApiResponse FeedbackService::submit(const std::string& round_id, const std::string& student_id,
                                    const std::string& draft,
                                    const std::optional<std::string>& authenticated_student) {
  if (auto denied = check_access(round_id, student_id, authenticated_student)) return *denied;
  const RoundConfig& round = config_.rounds.at(round_id);
  if (!round.is_open(clock_())) return error_response(403, "RoundClosed", "round is not open");
  if (auto invalid = validate_draft(draft)) return *invalid;

  StudentLocks& locks = locks_for(round_id, student_id);
  InteractionRecord record;
  record.student_id = student_id;
  record.round_id = round_id;
  record.kind = InteractionKind::FinalSubmission;
  record.draft_text = draft;

  std::vector<InteractionRecord> submissions;
  try {
    std::lock_guard write(locks.write);
    record.timestamp = next_timestamp(round_id, student_id);
    record.record_id = store_.append(record);
    submissions = store_.query({round_id, student_id, InteractionKind::FinalSubmission});
  } catch (const StoreError& e) {
    return store_failure(e);
  }

  ApiResponse response;
  response.body = {
      {"record_id", record.record_id},
      {"timestamp", format_rfc3339(record.timestamp)},
      {"round_id", round_id},
      {"student_id", student_id},
      {"submission_number", submissions.size()},
      {"replaces", submissions.size() > 1 ? ordered_json(submissions[submissions.size() - 2].record_id)
                                          : ordered_json(nullptr)},
  };
  return response;
}

ApiResponse FeedbackService::history(const std::string& round_id, const std::string& student_id,
                                     const std::optional<std::string>& authenticated_student) {
  if (auto denied = check_access(round_id, student_id, authenticated_student)) return *denied;

  std::vector<InteractionRecord> records;
  try {
    records = store_.query({round_id, student_id, std::nullopt});
  } catch (const StoreError& e) {
    return store_failure(e);
  }

  std::vector<InteractionRecord> requests;
  for (const auto& r : records) {
    if (r.kind == InteractionKind::FeedbackRequest) requests.push_back(r);
  }
  const InteractionRecord* first = first_with_table(requests);

  auto attempts = ordered_json::array();
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    ordered_json a = {
        {"attempt_number", i + 1},
        {"record_id", r.record_id},
        {"timestamp", format_rfc3339(r.timestamp)},
        {"error_count", r.error_count ? ordered_json(*r.error_count) : ordered_json(nullptr)},
        {"failed", r.failure.has_value()},
    };
    if (i > 0 && r.error_count && first) {
      a["delta_vs_first"] =
          static_cast<long long>(*r.error_count) - static_cast<long long>(*first->error_count);
    }
    attempts.push_back(std::move(a));
  }

  const InteractionRecord* last_submission = nullptr;
  std::size_t submission_count = 0;
  for (const auto& r : records) {
    if (r.kind == InteractionKind::FinalSubmission) {
      last_submission = &r;
      ++submission_count;
    }
  }

  ApiResponse response;
  response.body = {
      {"round_id", round_id},
      {"student_id", student_id},
      {"attempts", attempts},
      {"submitted", last_submission != nullptr},
      {"submission_count", submission_count},
      {"submitted_at", last_submission ? ordered_json(format_rfc3339(last_submission->timestamp))
                                       : ordered_json(nullptr)},
  };
  return response;
}

ApiResponse FeedbackService::list_rounds() {
  const Timestamp now = clock_();
  auto rounds = ordered_json::array();
  for (const auto& [id, round] : config_.rounds) {
    rounds.push_back({
        {"round_id", id},
        {"prompt_version", std::string(to_string(round.provider.prompt_version))},
        {"opens_at", round.opens_at ? ordered_json(format_rfc3339(*round.opens_at)) : ordered_json(nullptr)},
        {"closes_at", round.closes_at ? ordered_json(format_rfc3339(*round.closes_at)) : ordered_json(nullptr)},
        {"open", round.is_open(now)},
        {"char_limit", kMaxDraftChars},
    });
  }
  ApiResponse response;
  response.body = {{"rounds", rounds}};
  return response;
}

ApiResponse FeedbackService::analytics(const std::string& round_id, const std::string& what, bool csv) {
  if (!config_.expose_analytics) return error_response(404, "NotFound", "analytics export is disabled");
  const auto round = config_.rounds.find(round_id);
  if (round == config_.rounds.end()) {
    return error_response(404, "UnknownRound", "unknown round \"" + round_id + "\"");
  }
  std::vector<InteractionRecord> records;
  try {
    records = store_.query({round_id, std::nullopt, std::nullopt});
  } catch (const StoreError& e) {
    return store_failure(e);
  }

  ApiResponse response;
  const auto emit = [&](const ordered_json& json, std::string text) {
    if (csv) {
      response.content_type = "text/csv";
      response.text = std::move(text);
    } else {
      response.body = json;
    }
  };
  try {
    if (what == "funnel") {
      const auto s = analytics::compute_funnel(records, round_id);
      emit(analytics::funnel_json(s), analytics::funnel_csv(s));
    } else if (what == "interactions" || what == "interactions_relative") {
      const auto h = analytics::interaction_histogram(records, round_id, what != "interactions");
      emit(analytics::histogram_json(h), analytics::histogram_csv(h));
    } else if (what == "tasks") {
      const auto d = analytics::task_distribution(records, round_id);
      emit(analytics::tasks_json(d), analytics::tasks_csv(d));
    } else if (what == "categories") {
      const auto d = analytics::category_distribution(records, round_id,
                                                      round->second.provider.prompt_version);
      emit(analytics::categories_json(d), analytics::categories_csv(d));
    } else {
      return error_response(404, "NotFound", "unknown statistic \"" + what + "\"");
    }
  } catch (const analytics::NormalizationImpossible& e) {
    return error_response(409, "NormalizationImpossible", e.what());
  } catch (const analytics::VersionUnsupported& e) {
    return error_response(409, "VersionUnsupported", e.what());
  }
  return response;
}

}  // namespace draftcheck::service
