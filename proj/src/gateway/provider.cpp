#include "draftcheck/gateway/provider.hpp"

#include "draftcheck/core/text.hpp"
#include "draftcheck/gateway/http_provider.hpp"
#include "draftcheck/mock/mock_provider.hpp"

namespace draftcheck::gateway {

std::string_view to_string(ProviderKind kind) {
  return kind == ProviderKind::MockRules ? "mock" : "http";
}

std::optional<ProviderKind> parse_provider_kind(std::string_view text) {
  const std::string lower = to_lower_ascii(trim(text));
  if (lower == "mock" || lower == "mockrules" || lower == "mock_rules") return ProviderKind::MockRules;
  if (lower == "http" || lower == "httpllm" || lower == "http_llm") return ProviderKind::HttpLlm;
  return std::nullopt;
}

void ProviderConfig::validate() const {
  if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (provider_kind == ProviderKind::HttpLlm) {
    if (endpoint_url.empty()) throw ConfigError("http provider requires endpoint_url");
    if (api_key_ref.empty()) throw ConfigError("http provider requires api_key_ref");
    if (model_name.empty()) throw ConfigError("http provider requires model_name");
    parse_url(endpoint_url);
  }
}

std::string ProviderConfig::provider_id() const {
  if (provider_kind == ProviderKind::MockRules) {
    return model_name.empty() ? std::string(mock::kMockProviderId) : model_name;
  }
  return model_name;
}

ProviderUnavailable::ProviderUnavailable(const std::string& detail, int n)
    : std::runtime_error("provider unavailable after " + std::to_string(n) +
                         " attempt(s): " + detail),
      attempts(n) {}

ProviderResponseUnparseable::ProviderResponseUnparseable(std::string raw, std::string d)
    : std::runtime_error("provider response unparseable: " + d),
      raw_response(std::move(raw)),
      detail(std::move(d)) {}

std::string ProviderResponseUnparseable::excerpt() const {
  return raw_response.size() <= 200 ? raw_response : raw_response.substr(0, 200) + "...";
}

std::string MockRulesProvider::complete(const ProviderRequest& request) {
  ReportDraft draft;
  draft.text = request.draft_text;
  return mock::mock_feedback(draft, request.version);
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  if (config.provider_kind == ProviderKind::MockRules) return std::make_unique<MockRulesProvider>();
  return std::make_unique<HttpChatProvider>(config);
}

}  // namespace draftcheck::gateway
