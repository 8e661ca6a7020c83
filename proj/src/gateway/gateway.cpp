#include "draftcheck/gateway/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "draftcheck/core/errors.hpp"
#include "draftcheck/core/feedback_table.hpp"
#include "draftcheck/core/prompt.hpp"
#include "draftcheck/core/text.hpp"

namespace draftcheck::gateway {
namespace {

void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

}  // namespace

FeedbackGateway::FeedbackGateway(ProviderConfig config)
    : FeedbackGateway(config, make_provider(config), real_sleep,
                      static_cast<std::uint64_t>(
                          std::chrono::steady_clock::now().time_since_epoch().count())) {}

FeedbackGateway::FeedbackGateway(ProviderConfig config, std::unique_ptr<Provider> provider,
                                 Sleeper sleeper, std::uint64_t jitter_seed)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper(real_sleep)),
      rng_(jitter_seed) {
  config_.validate();
}

std::chrono::milliseconds FeedbackGateway::backoff_delay(int retry) {
  double unit = 0.0;
  {
    std::lock_guard lock(rng_mu_);
    unit = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  const double scale = 1.0 - backoff_.jitter + 2.0 * backoff_.jitter * unit;
  const double ms = static_cast<double>(backoff_.base.count()) * std::pow(backoff_.factor, retry) * scale;
  return std::min(backoff_.cap, std::chrono::milliseconds(static_cast<long long>(std::llround(ms))));
}

FeedbackTable FeedbackGateway::request_feedback(const ReportDraft& draft) {
  validate_draft_text(draft.text);

  ProviderRequest request;
  request.version = config_.prompt_version;
  request.system_prompt = std::string(system_prompt(config_.prompt_version));
  request.draft_text = draft.text;

  const int max_attempts = 1 + config_.max_retries;
  std::string raw;
  for (int attempt = 1;; ++attempt) {
    try {
      raw = provider_->complete(request);
      break;
    } catch (const TransientProviderError& e) {
      spdlog::warn("provider {} attempt {}/{} failed: {}", config_.provider_id(), attempt,
                   max_attempts, e.what());
      if (attempt >= max_attempts) throw ProviderUnavailable(e.what(), attempt);
      sleeper_(backoff_delay(attempt - 1));
    } catch (const PermanentProviderError& e) {
      throw ProviderUnavailable(e.what(), attempt);
    }
  }

  try {
    return parse_feedback(raw, config_.prompt_version, config_.provider_id());
  } catch (const NoJsonFound& e) {
    throw ProviderResponseUnparseable(std::move(raw), e.what());
  } catch (const SchemaViolation& e) {
    throw ProviderResponseUnparseable(std::move(raw), e.what());
  }
}

FeedbackTable request_feedback(const ProviderConfig& config, const ReportDraft& draft) {
  FeedbackGateway gateway(config);
  return gateway.request_feedback(draft);
}

}  // namespace draftcheck::gateway
