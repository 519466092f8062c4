#pragma once

#include <cstdint>
#include <memory>

#include "wow/common/clock.hpp"
#include "wow/gateway/config.hpp"
#include "wow/sync/sync_server.hpp"

namespace wow::gateway {

/// HTTP API, static UI and the sync channel on one listening socket.
class GatewayServer {
 public:
  /// `clock` must outlive the server; the default is the system clock.
  explicit GatewayServer(GatewayConfig config, const Clock* clock = nullptr);
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  /// Binds and starts the worker threads. Port 0 picks a free port.
  Status start();
  /// Stops accepting, drops every connection and joins the workers.
  void stop();
  /// The bound port, valid after start().
  std::uint16_t port() const;

  sync::SyncServer& sync();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wow::gateway
