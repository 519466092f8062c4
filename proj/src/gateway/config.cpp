#include "wow/gateway/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

namespace wow::gateway {

using nlohmann::json;

namespace {

template <class T>
Result<T> parse_number(std::string_view name, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return make_error(Errc::kMalformed, std::string(name) + " is not a number: " + std::string(text));
  }
  return value;
}

}  // namespace

std::optional<std::string> process_env(const char* name) {
  if (const char* v = std::getenv(name)) return std::string(v);
  return std::nullopt;
}

Result<std::map<std::string, std::string>> parse_user_list(std::string_view text) {
  std::map<std::string, std::string> users;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto entry = text.substr(0, comma);
    const auto colon = entry.find(':');
    if (colon == std::string_view::npos || colon == 0) {
      return make_error(Errc::kMalformed, "user entry '" + std::string(entry) + "'");
    }
    users[std::string(entry.substr(0, colon))] = std::string(entry.substr(colon + 1));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return users;
}

Result<GatewayConfig> load_config(const std::optional<std::filesystem::path>& file,
                                  const EnvLookup& env) {
  GatewayConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) return make_error(Errc::kNoSuchEntity, "config file " + file->string());
    const json j = json::parse(in, nullptr, false);
    if (!j.is_object()) return make_error(Errc::kMalformed, "config file is not a JSON object");
    try {
      c.bind = j.value("bind", c.bind);
      c.port = j.value("port", c.port);
      if (j.contains("storageRoot")) c.storage_root = j["storageRoot"].get<std::string>();
      c.upload_limit_bytes = j.value("uploadLimitBytes", c.upload_limit_bytes);
      c.max_cursor_rate = j.value("maxCursorRate", c.max_cursor_rate);
      c.heartbeat_ms = j.value("heartbeatMs", c.heartbeat_ms);
      if (j.contains("uiRoot") && !j["uiRoot"].is_null()) c.ui_root = j["uiRoot"].get<std::string>();
      c.token_ttl_seconds = j.value("tokenTtlSeconds", c.token_ttl_seconds);
      c.threads = j.value("threads", c.threads);
      for (const auto& u : j.value("users", json::array())) {
        c.users[u.at("name").get<std::string>()] = u.at("secret").get<std::string>();
      }
    } catch (const json::exception& e) {
      return make_error(Errc::kMalformed, e.what());
    }
  }

  if (auto v = env("WOW_BIND")) c.bind = *v;
  if (auto v = env("WOW_PORT")) {
    auto port = parse_number<std::uint16_t>("WOW_PORT", *v);
    if (!port) return port.error();
    c.port = *port;
  }
  if (auto v = env("WOW_STORAGE_ROOT")) c.storage_root = *v;
  if (auto v = env("WOW_UPLOAD_LIMIT")) {
    auto limit = parse_number<std::uint64_t>("WOW_UPLOAD_LIMIT", *v);
    if (!limit) return limit.error();
    c.upload_limit_bytes = *limit;
  }
  if (auto v = env("WOW_CURSOR_RATE")) {
    auto rate = parse_number<int>("WOW_CURSOR_RATE", *v);
    if (!rate) return rate.error();
    c.max_cursor_rate = *rate;
  }
  if (auto v = env("WOW_HEARTBEAT_MS")) {
    auto ms = parse_number<std::int64_t>("WOW_HEARTBEAT_MS", *v);
    if (!ms) return ms.error();
    c.heartbeat_ms = *ms;
  }
  if (auto v = env("WOW_UI_ROOT")) {
    if (v->empty()) {
      c.ui_root.reset();
    } else {
      c.ui_root = *v;
    }
  }
  if (auto v = env("WOW_USERS")) {
    auto users = parse_user_list(*v);
    if (!users) return users.error();
    c.users = std::move(users).value();
  }

  if (c.max_cursor_rate < 1) return make_error(Errc::kMalformed, "maxCursorRate must be >= 1");
  if (c.heartbeat_ms < 1) return make_error(Errc::kMalformed, "heartbeatMs must be >= 1");
  if (c.threads < 1) c.threads = 1;
  return c;
}

}  // namespace wow::gateway
