#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "draftcheck/gateway/gateway.hpp"
#include "draftcheck/service/config.hpp"
#include "draftcheck/store/event_store.hpp"

namespace draftcheck::service {

using Clock = std::function<Timestamp()>;
using ProviderFactory = std::function<std::unique_ptr<gateway::Provider>(const gateway::ProviderConfig&)>;

struct ServiceOptions {
  Clock clock;                       // defaults to the system clock
  gateway::Sleeper sleeper;          // retry backoff; defaults to a real sleep
  ProviderFactory provider_factory;  // defaults to gateway::make_provider
};

struct ApiResponse {
  int status{200};
  nlohmann::ordered_json body;
  std::string content_type{"application/json"};
  std::string text;  // used instead of body when non-empty (CSV exports)
};

// Transport-independent request handling. Every 2xx feedback/submit response corresponds to
// exactly one appended record; a provider failure appends a table-less record and answers 502.
class FeedbackService {
 public:
  FeedbackService(ServiceConfig config, EventStore& store, ServiceOptions options = {});

  // `authenticated_student` is the proxy-supplied identity; ignored in dev mode.
  ApiResponse request_feedback(const std::string& round_id, const std::string& student_id,
                               const std::string& draft,
                               const std::optional<std::string>& authenticated_student = std::nullopt);
  ApiResponse submit(const std::string& round_id, const std::string& student_id,
                     const std::string& draft,
                     const std::optional<std::string>& authenticated_student = std::nullopt);
  ApiResponse history(const std::string& round_id, const std::string& student_id,
                      const std::optional<std::string>& authenticated_student = std::nullopt);
  ApiResponse list_rounds();
  // what: funnel | interactions | interactions_relative | tasks | categories
  ApiResponse analytics(const std::string& round_id, const std::string& what, bool csv);

  const ServiceConfig& config() const { return config_; }

 private:
  struct StudentLocks {
    std::mutex in_flight;  // held for the duration of a feedback request
    std::mutex write;      // timestamp selection + append
  };

  std::optional<ApiResponse> check_access(const std::string& round_id, const std::string& student_id,
                                          const std::optional<std::string>& authenticated_student);
  StudentLocks& locks_for(const std::string& round_id, const std::string& student_id);
  Timestamp next_timestamp(const std::string& round_id, const std::string& student_id);
  ApiResponse store_failure(const std::exception& e);

  ServiceConfig config_;
  EventStore& store_;
  Clock clock_;
  std::map<std::string, std::unique_ptr<gateway::FeedbackGateway>> gateways_;
  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<StudentLocks>> locks_;
};

nlohmann::ordered_json table_json(const FeedbackTable& table);

}  // namespace draftcheck::service
