#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "draftcheck/core/types.hpp"

namespace draftcheck::gateway {

enum class ProviderKind { MockRules, HttpLlm };

struct ProviderConfig {
  ProviderKind provider_kind{ProviderKind::MockRules};
  std::string endpoint_url;  // HttpLlm only
  std::string model_name;
  std::string api_key_ref;  // name of the environment variable holding the key
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
  int max_retries{2};
  PromptVersion prompt_version{PromptVersion::V1};
  double temperature{0.0};

  // Throws ConfigError.
  void validate() const;
  // Identifier recorded on every table: the model name for HTTP providers.
  std::string provider_id() const;
};

std::string_view to_string(ProviderKind kind);
std::optional<ProviderKind> parse_provider_kind(std::string_view text);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Transport-level failures raised by providers.
struct TransientProviderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PermanentProviderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Errors surfaced by the gateway.
struct AuthFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProviderUnavailable : std::runtime_error {
  int attempts;
  ProviderUnavailable(const std::string& detail, int attempts);
};

struct ProviderResponseUnparseable : std::runtime_error {
  std::string raw_response;
  std::string detail;
  ProviderResponseUnparseable(std::string raw, std::string detail);
  // First 200 bytes of the raw response, for messages.
  std::string excerpt() const;
};

struct ProviderRequest {
  PromptVersion version{PromptVersion::V1};
  std::string system_prompt;
  std::string draft_text;
};

// Text in, text out. Implementations throw TransientProviderError for failures worth retrying,
// AuthFailure for rejected credentials and PermanentProviderError otherwise.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const ProviderRequest& request) = 0;
};

class MockRulesProvider final : public Provider {
 public:
  std::string complete(const ProviderRequest& request) override;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

}  // namespace draftcheck::gateway
