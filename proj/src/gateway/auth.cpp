#include "wow/gateway/auth.hpp"

#include <openssl/rand.h>

#include <array>

namespace wow::gateway {
namespace {

bool same_secret(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    diff |= static_cast<unsigned char>(a[i] ^ b[i]);
  }
  return diff == 0;
}

Result<std::string> random_token() {
  std::array<unsigned char, 24> bytes{};
  if (RAND_bytes(bytes.data(), static_cast<int>(bytes.size())) != 1) {
    return make_error(Errc::kAuthFailed, "no entropy");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

}  // namespace

TokenAuthenticator::TokenAuthenticator(const Clock& clock, std::map<std::string, std::string> users,
                                       std::int64_t ttl_seconds)
    : clock_(clock), users_(std::move(users)), ttl_us_(ttl_seconds * 1'000'000) {}

Result<std::string> TokenAuthenticator::login(const std::string& name, const std::string& secret) {
  auto it = users_.find(name);
  if (it == users_.end() || !same_secret(it->second, secret)) {
    return make_error(Errc::kAuthFailed, "bad credentials");
  }
  auto token = random_token();
  if (!token) return token;
  std::lock_guard lock(mu_);
  const std::int64_t now = clock_.now_us();
  std::erase_if(tokens_, [&](const auto& entry) { return entry.second.expires_us <= now; });
  tokens_[*token] = Grant{name, now + ttl_us_};
  return token;
}

Result<sync::Identity> TokenAuthenticator::verify(std::string_view token) const {
  std::lock_guard lock(mu_);
  auto it = tokens_.find(token);
  if (it == tokens_.end()) return make_error(Errc::kAuthFailed, "unknown token");
  if (it->second.expires_us <= clock_.now_us()) return make_error(Errc::kAuthFailed, "token expired");
  return sync::Identity{ParticipantId(it->second.user), it->second.user};
}

}  // namespace wow::gateway
