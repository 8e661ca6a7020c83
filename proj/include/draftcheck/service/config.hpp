#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "draftcheck/core/types.hpp"
#include "draftcheck/gateway/provider.hpp"

namespace draftcheck::service {

enum class AuthMode {
  Dev,    // the student id in the URL is trusted
  Proxy,  // a reverse proxy supplies the authenticated id in `student_header`
};

struct RoundConfig {
  std::string round_id;
  std::optional<Timestamp> opens_at;
  std::optional<Timestamp> closes_at;  // exclusive
  gateway::ProviderConfig provider;

  bool is_open(Timestamp now) const {
    return (!opens_at || now >= *opens_at) && (!closes_at || now < *closes_at);
  }
};

struct ServiceConfig {
  std::string listen_host{"127.0.0.1"};
  int listen_port{8080};
  std::filesystem::path store_dir{"data"};
  AuthMode auth_mode{AuthMode::Dev};
  std::string student_header{"X-Student-Id"};
  std::optional<std::filesystem::path> static_dir;
  bool expose_analytics{true};
  std::map<std::string, RoundConfig> rounds;
};

// Thrown with a "<source>:<line>: <message>" description.
struct ConfigFileError : std::runtime_error {
  std::size_t line;
  ConfigFileError(const std::string& source, std::size_t line, const std::string& message);
};

// INI-style key/value text; see docs/configuration.md. Relative paths resolve against `base_dir`.
ServiceConfig parse_service_config(std::string_view text, const std::string& source = "<config>",
                                   const std::filesystem::path& base_dir = {});

ServiceConfig load_service_config(const std::filesystem::path& path);

// "host:port"; throws std::invalid_argument.
std::pair<std::string, int> parse_listen_address(std::string_view text);

}  // namespace draftcheck::service
