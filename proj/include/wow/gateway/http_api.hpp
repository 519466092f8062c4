#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wow/gateway/auth.hpp"
#include "wow/gateway/config.hpp"
#include "wow/persistence/blob_store.hpp"
#include "wow/sync/sync_server.hpp"

namespace wow::gateway {

struct HttpRequest {
  std::string method;
  std::string target;  // path plus optional query
  /// Header names are lower-case.
  std::map<std::string, std::string> headers;
  std::string body;

  std::optional<std::string> header(const std::string& lower_name) const;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct Target {
  std::string path;
  std::map<std::string, std::string> query;
};

/// Splits path and query and percent-decodes both.
Target parse_target(std::string_view target);
/// `plus_is_space` applies form encoding, as in query strings.
std::string percent_decode(std::string_view text, bool plus_is_space = false);

/// A request that may be upgraded to the sync channel.
struct ChannelGrant {
  SessionId session;
  sync::Identity identity;
};

/// Transport-independent request handling. Holds no per-request state, so
/// one instance serves every connection.
class HttpApi {
 public:
  HttpApi(const GatewayConfig& config, sync::SyncServer& sync, persistence::BlobStore& blobs,
          TokenAuthenticator& auth);

  HttpResponse handle(const HttpRequest& request) const;

  /// True if the path names a sync channel, whether or not it is allowed.
  static bool is_channel_path(std::string_view target);
  /// The grant when the token and session are good, otherwise the error
  /// response to send instead of upgrading.
  std::variant<ChannelGrant, HttpResponse> authorize_channel(const HttpRequest& request) const;

 private:
  std::optional<sync::Identity> identify(const HttpRequest& request, const Target& target) const;

  HttpResponse login(const HttpRequest& request) const;
  HttpResponse create_session(const HttpRequest& request) const;
  HttpResponse list_sessions() const;
  HttpResponse session_metadata(const SessionId& id) const;
  HttpResponse upload(const HttpRequest& request, const SessionId& id) const;
  HttpResponse download(const std::string& hash) const;
  HttpResponse export_session(const SessionId& id) const;
  HttpResponse static_asset(const std::string& path) const;

  const GatewayConfig& config_;
  sync::SyncServer& sync_;
  persistence::BlobStore& blobs_;
  TokenAuthenticator& auth_;
};

HttpResponse json_error(int status, Errc code, const std::string& detail);
int http_status_for(Errc code);

}  // namespace wow::gateway
