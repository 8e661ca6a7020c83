#include "draftcheck/gateway/http_provider.hpp"

#include <cstdlib>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "draftcheck/core/text.hpp"

namespace draftcheck::gateway {

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint_url lacks a scheme: " + url);
  out.scheme = to_lower_ascii(url.substr(0, scheme_end));
  if (out.scheme != "http" && out.scheme != "https") {
    throw ConfigError("endpoint_url scheme must be http or https: " + url);
  }
  const auto authority_begin = scheme_end + 3;
  const auto path_begin = url.find('/', authority_begin);
  const std::string authority = url.substr(authority_begin, path_begin - authority_begin);
  out.path = path_begin == std::string::npos ? "/" : url.substr(path_begin);
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos && authority.find(']') == std::string::npos) {
    out.host = authority.substr(0, colon);
    try {
      std::size_t used = 0;
      out.port = std::stoi(authority.substr(colon + 1), &used);
      if (used != authority.size() - colon - 1 || out.port <= 0 || out.port > 65535) {
        throw std::invalid_argument("port");
      }
    } catch (const std::exception&) {
      throw ConfigError("endpoint_url has an invalid port: " + url);
    }
  } else {
    out.host = authority;
    out.port = out.scheme == "https" ? 443 : 80;
  }
  if (out.host.empty()) throw ConfigError("endpoint_url has no host: " + url);
  return out;
}

std::string extract_completion_text(const std::string& body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return body;
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) return body;
  const auto& first = choices->front();
  if (!first.is_object()) return body;
  const auto message = first.find("message");
  if (message == first.end() || !message->is_object()) return body;
  const auto content = message->find("content");
  if (content == message->end() || !content->is_string()) return body;
  return content->get<std::string>();
}

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
  const ParsedUrl url = parse_url(config_.endpoint_url);
  origin_ = url.scheme + "://" + url.host + ":" + std::to_string(url.port);
  path_ = url.path;
}

nlohmann::json HttpChatProvider::request_body(const ProviderRequest& request) const {
  return {
      {"model", config_.model_name},
      {"temperature", config_.temperature},
      {"messages",
       nlohmann::json::array({
           {{"role", "system"}, {"content", request.system_prompt}},
           {{"role", "user"}, {"content", request.draft_text}},
       })},
  };
}

std::string HttpChatProvider::complete(const ProviderRequest& request) {
  const char* key = std::getenv(config_.api_key_ref.c_str());
  if (key == nullptr || *key == '\0') {
    throw AuthFailure("secret " + config_.api_key_ref + " is not set");
  }

  httplib::Client client(origin_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
  const std::string body = request_body(request).dump();
  spdlog::debug("llm request to {}{} ({} bytes): {}", origin_, path_, body.size(), body);

  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw TransientProviderError("transport error: " + httplib::to_string(res.error()));
  }
  spdlog::debug("llm response status {} ({} bytes): {}", res->status, res->body.size(), res->body);
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw AuthFailure("provider rejected credentials (HTTP " + std::to_string(status) + ")");
  }
  if (status == 408 || status == 429 || status >= 500) {
    throw TransientProviderError("HTTP " + std::to_string(status));
  }
  if (status < 200 || status >= 300) {
    throw PermanentProviderError("HTTP " + std::to_string(status));
  }
  return extract_completion_text(res->body);
}

}  // namespace draftcheck::gateway
