#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "wow/common/result.hpp"

namespace wow::gateway {

struct GatewayConfig {
  std::string bind = "127.0.0.1";
  std::uint16_t port = 8080;
  std::filesystem::path storage_root = "wow-data";
  std::uint64_t upload_limit_bytes = 200ull * 1024 * 1024;
  int max_cursor_rate = 60;
  std::int64_t heartbeat_ms = 5000;
  /// Directory holding the UI bundle; unset means no UI is served.
  std::optional<std::filesystem::path> ui_root;
  std::int64_t token_ttl_seconds = 12 * 3600;
  int threads = 2;
  /// user name -> secret
  std::map<std::string, std::string> users;
};

using EnvLookup = std::function<std::optional<std::string>(const char* name)>;

/// Reads the process environment.
std::optional<std::string> process_env(const char* name);

/// Defaults, then the JSON file (if any), then WOW_* environment overrides.
Result<GatewayConfig> load_config(const std::optional<std::filesystem::path>& file,
                                  const EnvLookup& env = process_env);

/// Parses "name:secret,name:secret".
Result<std::map<std::string, std::string>> parse_user_list(std::string_view text);

}  // namespace wow::gateway
