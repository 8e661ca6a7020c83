#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <random>

#include "draftcheck/core/types.hpp"
#include "draftcheck/gateway/provider.hpp"

namespace draftcheck::gateway {

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct BackoffPolicy {
  std::chrono::milliseconds base{1000};
  double factor{2.0};
  double jitter{0.2};  // delay is scaled by a uniform factor in [1 - jitter, 1 + jitter]
  std::chrono::milliseconds cap{30000};
};

// Builds the prompt, calls the provider with retries on transient failures and parses the reply.
// Parse failures are never retried.
class FeedbackGateway {
 public:
  explicit FeedbackGateway(ProviderConfig config);
  FeedbackGateway(ProviderConfig config, std::unique_ptr<Provider> provider, Sleeper sleeper,
                  std::uint64_t jitter_seed = 0x5eed);

  // Throws EmptyDraft/DraftTooLong/InvalidEncoding, AuthFailure, ProviderUnavailable or
  // ProviderResponseUnparseable.
  FeedbackTable request_feedback(const ReportDraft& draft);

  const ProviderConfig& config() const { return config_; }

  // Delay before retry number `retry` (0-based).
  std::chrono::milliseconds backoff_delay(int retry);

 private:
  ProviderConfig config_;
  std::unique_ptr<Provider> provider_;
  Sleeper sleeper_;
  BackoffPolicy backoff_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

FeedbackTable request_feedback(const ProviderConfig& config, const ReportDraft& draft);

}  // namespace draftcheck::gateway
