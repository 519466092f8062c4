#pragma once

#include <map>
#include <mutex>
#include <string>

#include "wow/common/clock.hpp"
#include "wow/sync/sync_server.hpp"

namespace wow::gateway {

/// Stub credential store with opaque, expiring bearer tokens. A user's
/// participant id is the user name, so every login of the same user maps to
/// the same participant.
class TokenAuthenticator {
 public:
  TokenAuthenticator(const Clock& clock, std::map<std::string, std::string> users,
                     std::int64_t ttl_seconds);

  /// AuthFailed for unknown users or wrong secrets.
  Result<std::string> login(const std::string& name, const std::string& secret);
  /// AuthFailed for unknown or expired tokens.
  Result<sync::Identity> verify(std::string_view token) const;

 private:
  struct Grant {
    std::string user;
    std::int64_t expires_us = 0;
  };

  const Clock& clock_;
  std::map<std::string, std::string> users_;
  std::int64_t ttl_us_;
  mutable std::mutex mu_;
  std::map<std::string, Grant, std::less<>> tokens_;
};

}  // namespace wow::gateway
