#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "wow/common/result.hpp"

namespace wow::sim {

/// Blocking WebSocket client for the sync channel, with receive timeouts.
/// Not thread-safe; one owner drives it.
class WsChannel {
 public:
  ~WsChannel();
  WsChannel(WsChannel&&) noexcept;
  WsChannel& operator=(WsChannel&&) noexcept;

  /// `target` is the request path including the query, e.g.
  /// "/api/sessions/s1/channel?token=...". A refused upgrade yields
  /// ConnectFailed with the HTTP status in `http_status`.
  static Result<WsChannel> connect(const std::string& host, std::uint16_t port,
                                   const std::string& target, int* http_status = nullptr);

  Status send(const std::string& text);
  /// Nullopt on timeout. ConnectFailed once the peer has closed.
  Result<std::optional<std::string>> receive(std::chrono::milliseconds timeout);
  bool open() const;
  void close();

 private:
  struct Impl;
  explicit WsChannel(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace wow::sim
