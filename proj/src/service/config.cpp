#include "draftcheck/service/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "draftcheck/core/text.hpp"
#include "draftcheck/store/interaction_record.hpp"
#include "draftcheck/store/timestamp.hpp"

namespace draftcheck::service {
namespace {

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

bool parse_bool(const std::string& v, bool& out) {
  const std::string lower = to_lower_ascii(v);
  if (lower == "true" || lower == "yes" || lower == "1" || lower == "on") {
    out = true;
    return true;
  }
  if (lower == "false" || lower == "no" || lower == "0" || lower == "off") {
    out = false;
    return true;
  }
  return false;
}

struct PendingRound {
  RoundConfig config;
  std::size_t header_line{0};
};

}  // namespace

ConfigFileError::ConfigFileError(const std::string& source, std::size_t l, const std::string& message)
    : std::runtime_error(fmt::format("{}:{}: {}", source, l, message)), line(l) {}

std::pair<std::string, int> parse_listen_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("expected host:port");
  const std::string host(text.substr(0, colon));
  const std::string port_text(text.substr(colon + 1));
  std::size_t used = 0;
  int port = -1;
  try {
    port = std::stoi(port_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (host.empty() || used != port_text.size() || port < 0 || port > 65535) {
    throw std::invalid_argument("invalid listen address \"" + std::string(text) + "\"");
  }
  return {host, port};
}

ServiceConfig parse_service_config(std::string_view text, const std::string& source,
                                   const std::filesystem::path& base_dir) {
  ServiceConfig config;
  std::vector<PendingRound> rounds;
  const auto fail = [&](std::size_t line, const std::string& msg) -> ConfigFileError {
    return ConfigFileError(source, line, msg);
  };
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw fail(line_no, "unterminated section header");
      const std::string_view inner = trim(line.substr(1, line.size() - 2));
      if (inner.substr(0, 6) != "round " && inner.substr(0, 6) != "round\t") {
        throw fail(line_no, "unknown section [" + std::string(inner) + "], expected [round <id>]");
      }
      const std::string id(trim(inner.substr(6)));
      if (!is_valid_identifier(id)) throw fail(line_no, "invalid round id \"" + id + "\"");
      for (const auto& r : rounds) {
        if (r.config.round_id == id) throw fail(line_no, "duplicate round \"" + id + "\"");
      }
      PendingRound r;
      r.config.round_id = id;
      r.header_line = line_no;
      rounds.push_back(std::move(r));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw fail(line_no, "expected key = value");
    const std::string key = to_lower_ascii(trim(line.substr(0, eq)));
    const std::string value = unquote(trim(line.substr(eq + 1)));

    if (rounds.empty()) {
      if (key == "listen") {
        try {
          std::tie(config.listen_host, config.listen_port) = parse_listen_address(value);
        } catch (const std::invalid_argument& e) {
          throw fail(line_no, e.what());
        }
      } else if (key == "store_dir") {
        config.store_dir = resolve(value);
      } else if (key == "auth_mode") {
        if (value == "dev") {
          config.auth_mode = AuthMode::Dev;
        } else if (value == "proxy") {
          config.auth_mode = AuthMode::Proxy;
        } else {
          throw fail(line_no, "auth_mode must be dev or proxy");
        }
      } else if (key == "student_header") {
        if (value.empty()) throw fail(line_no, "student_header must not be empty");
        config.student_header = value;
      } else if (key == "static_dir") {
        config.static_dir = resolve(value);
      } else if (key == "expose_analytics") {
        if (!parse_bool(value, config.expose_analytics)) throw fail(line_no, "expected true or false");
      } else {
        throw fail(line_no, "unknown key \"" + key + "\"");
      }
      continue;
    }

    RoundConfig& round = rounds.back().config;
    auto& provider = round.provider;
    if (key == "opens_at" || key == "closes_at") {
      const auto ts = parse_rfc3339(value);
      if (!ts) throw fail(line_no, key + " must be an RFC 3339 timestamp");
      (key == "opens_at" ? round.opens_at : round.closes_at) = *ts;
    } else if (key == "prompt_version") {
      const auto v = parse_prompt_version(value);
      if (!v) throw fail(line_no, "prompt_version must be v1 or v2");
      provider.prompt_version = *v;
    } else if (key == "provider") {
      const auto kind = gateway::parse_provider_kind(value);
      if (!kind) throw fail(line_no, "provider must be mock or http");
      provider.provider_kind = *kind;
    } else if (key == "endpoint_url") {
      provider.endpoint_url = value;
    } else if (key == "model_name") {
      provider.model_name = value;
    } else if (key == "api_key_ref") {
      provider.api_key_ref = value;
    } else if (key == "timeout_s") {
      double seconds = 0;
      try {
        seconds = std::stod(value);
      } catch (const std::exception&) {
        throw fail(line_no, "timeout_s must be a number");
      }
      if (!(seconds > 0) || !std::isfinite(seconds)) throw fail(line_no, "timeout_s must be > 0");
      provider.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(seconds * 1000)));
    } else if (key == "max_retries") {
      std::size_t used = 0;
      int n = -1;
      try {
        n = std::stoi(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size() || n < 0) throw fail(line_no, "max_retries must be an integer >= 0");
      provider.max_retries = n;
    } else if (key == "temperature") {
      try {
        provider.temperature = std::stod(value);
      } catch (const std::exception&) {
        throw fail(line_no, "temperature must be a number");
      }
    } else {
      throw fail(line_no, "unknown round key \"" + key + "\"");
    }
  }

  for (auto& r : rounds) {
    try {
      r.config.provider.validate();
    } catch (const gateway::ConfigError& e) {
      throw fail(r.header_line, "round " + r.config.round_id + ": " + e.what());
    }
    if (r.config.opens_at && r.config.closes_at && *r.config.closes_at <= *r.config.opens_at) {
      throw fail(r.header_line, "round " + r.config.round_id + ": closes_at must be after opens_at");
    }
    config.rounds.emplace(r.config.round_id, std::move(r.config));
  }
  return config;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigFileError(path.string(), 0, "cannot read file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_service_config(buffer.str(), path.string(), path.parent_path());
}

}  // namespace draftcheck::service
