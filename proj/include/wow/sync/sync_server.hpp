#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wow/common/clock.hpp"
#include "wow/persistence/session_store.hpp"
#include "wow/sync/protocol.hpp"

namespace wow::sync {

struct SyncConfig {
  std::int64_t heartbeat_us = 5'000'000;
  int missed_heartbeats = 3;
  /// Forwarded Move updates per second per cursor owner.
  int max_cursor_rate = 60;
  std::size_t dedup_capacity = 256;
  std::int64_t dedup_window_us = 60'000'000;
};

/// An authenticated user. The same credentials always map to the same participant.
struct Identity {
  ParticipantId participant;
  std::string display_name;
};

using Authenticator = std::function<Result<Identity>(std::string_view token)>;

/// Outbound half of a client connection. Implementations must not block and
/// must not call back into the server from inside send() or close().
class Outbox {
 public:
  virtual ~Outbox() = default;
  virtual void send(std::string text) = 0;
  virtual void close() = 0;
};

using ConnectionId = std::uint64_t;

struct SessionSummary {
  SessionId id;
  std::string name;
  std::int64_t last_active_ms = 0;
  int participant_count = 0;  // currently connected
  std::uint64_t version = 0;
};

/// Coordinates all live sessions. Each session's messages are processed one
/// at a time under that session's lock, which gives the single total order;
/// different sessions proceed in parallel.
class SyncServer {
 public:
  SyncServer(persistence::SessionStore& store, const Clock& clock, Authenticator authenticate,
             SyncConfig config = {});
  ~SyncServer();

  SyncServer(const SyncServer&) = delete;
  SyncServer& operator=(const SyncServer&) = delete;

  /// A random id is chosen when `id` is empty.
  Result<Session> create_session(const std::string& name, int grid_cols = kDefaultGridCols,
                                 int grid_rows = kDefaultGridRows,
                                 std::optional<SessionId> id = std::nullopt);
  /// Current state, restoring the session from storage on first use.
  Result<Session> session(const SessionId& id);
  Result<SessionSummary> summary(const SessionId& id);
  std::vector<SessionSummary> list_sessions();

  /// Registers a transport connection. `preauthenticated` skips the token
  /// check in Hello (the transport verified it already).
  Result<ConnectionId> open(const SessionId& id, std::shared_ptr<Outbox> outbox,
                            std::optional<Identity> preauthenticated = std::nullopt);
  /// Handles one inbound text frame.
  void receive(ConnectionId conn, std::string_view text);
  /// The transport is gone.
  void close(ConnectionId conn);
  /// Heartbeats, liveness, cursor flushing and time-based snapshots.
  void tick();

  const SyncConfig& config() const { return config_; }

 private:
  struct Hub;
  struct Connection;

  Result<std::shared_ptr<Hub>> hub_for(const SessionId& id);
  std::shared_ptr<Hub> hub_of(ConnectionId conn);

  void on_hello(Hub& hub, Connection& conn, const Envelope& env);
  void on_command(Hub& hub, Connection& conn, const Envelope& env);
  void on_cursor(Hub& hub, Connection& conn, const Envelope& env);

  /// Applies, journals (write-ahead) and broadcasts. Returns the encoded
  /// Event envelope on success.
  Result<std::string> commit(Hub& hub, const Command& command, const ParticipantId& actor,
                             const std::string& request_id);
  void broadcast(Hub& hub, const std::string& text, std::optional<ConnectionId> except = {});
  void broadcast_presence(Hub& hub);
  void drop(Hub& hub, ConnectionId conn);
  void forward_cursor(Hub& hub, const CursorState& cursor, ConnectionId from);
  void maybe_snapshot(Hub& hub);

  persistence::SessionStore& store_;
  const Clock& clock_;
  Authenticator authenticate_;
  SyncConfig config_;

  std::mutex mu_;
  std::map<SessionId, std::shared_ptr<Hub>> hubs_;
  std::unordered_map<ConnectionId, std::shared_ptr<Hub>> connections_;
  ConnectionId next_connection_ = 1;
};

}  // namespace wow::sync
