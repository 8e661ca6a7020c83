#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "draftcheck/gateway/provider.hpp"

namespace draftcheck::gateway {

// OpenAI-compatible chat-completions client. One system message carries the prompt and one user
// message carries the draft. The API key is read from the environment on every call.
class HttpChatProvider final : public Provider {
 public:
  explicit HttpChatProvider(ProviderConfig config);

  std::string complete(const ProviderRequest& request) override;

  nlohmann::json request_body(const ProviderRequest& request) const;

 private:
  ProviderConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

// Content of choices[0].message.content when the body is a chat-completions response; otherwise
// the body itself, so endpoints that answer with the table directly also work.
std::string extract_completion_text(const std::string& body);

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port{0};
  std::string path;
};

// Throws ConfigError for anything other than http(s)://host[:port][/path].
ParsedUrl parse_url(const std::string& url);

}  // namespace draftcheck::gateway
