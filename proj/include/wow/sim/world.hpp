#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wow/common/clock.hpp"
#include "wow/persistence/session_store.hpp"
#include "wow/persistence/storage.hpp"
#include "wow/sim/rng.hpp"
#include "wow/sync/sync_server.hpp"

namespace wow::sim {

/// One inbound frame and when the server sent it (world milliseconds).
struct Frame {
  std::string text;
  std::int64_t sent_ms = 0;
};

/// The client half of a channel.
class Link {
 public:
  virtual ~Link() = default;
  virtual Status send(const std::string& text) = 0;
  /// Frames delivered since the last call.
  virtual std::vector<Frame> take() = 0;
  /// False once either side closed the channel.
  virtual bool open() const = 0;
  virtual void close() = 0;
};

/// Where simulated clients live: an embedded server on a simulated network,
/// or a live gateway. Users are numbered; -1 is the harness's own auditor.
class World {
 public:
  virtual ~World() = default;
  virtual std::string mode() const = 0;
  virtual Result<SessionId> create_session(const std::string& name, int cols, int rows) = 0;
  virtual Result<std::unique_ptr<Link>> connect(const SessionId& session, int user) = 0;
  /// Lets `ms` milliseconds of world time pass.
  virtual void advance(std::int64_t ms) = 0;
  virtual std::int64_t now_ms() const = 0;
  /// True when nothing is in flight in either direction.
  virtual bool quiet() const = 0;
  virtual Result<Session> server_state(const SessionId& session) = 0;
  /// Kills the server without any shutdown work and starts a new one on the
  /// same storage. Every channel is dropped.
  virtual Status restart() { return make_error(Errc::kForbidden, "restart needs in-process mode"); }
};

std::string user_name(int user);

struct InProcessOptions {
  std::uint64_t seed = 1;
  /// Each frame is delayed by a uniform 0..max_delay_ms, order kept per direction.
  int max_delay_ms = 20;
  /// Probability that a client's Command frame is delivered a second time.
  double duplicate_commands = 0.0;
  persistence::PersistenceConfig persistence{500, 60'000'000, false};
  sync::SyncConfig sync;
};

/// Embedded server, loopback transport, simulated time. Deterministic for a
/// given seed and call sequence.
class InProcessWorld final : public World {
 public:
  explicit InProcessWorld(InProcessOptions options = {});
  ~InProcessWorld() override;

  std::string mode() const override { return "in-process"; }
  Result<SessionId> create_session(const std::string& name, int cols, int rows) override;
  Result<std::unique_ptr<Link>> connect(const SessionId& session, int user) override;
  void advance(std::int64_t ms) override;
  std::int64_t now_ms() const override;
  bool quiet() const override;
  Result<Session> server_state(const SessionId& session) override;
  Status restart() override;

  std::shared_ptr<persistence::MemoryStorage> storage() { return storage_; }
  sync::SyncServer& server() { return *server_; }
  persistence::SessionStore& store() { return *store_; }
  ManualClock& clock() { return clock_; }

  struct Pipe;

 private:
  void build_server();
  void deliver_due();

  InProcessOptions options_;
  ManualClock clock_;
  Rng rng_;
  std::shared_ptr<persistence::MemoryStorage> storage_;
  std::unique_ptr<persistence::SessionStore> store_;
  std::unique_ptr<sync::SyncServer> server_;
  std::vector<std::shared_ptr<Pipe>> pipes_;
  std::uint64_t order_ = 0;
};

struct RemoteOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;
  /// name, secret; user n logs in with entry n, the auditor with entry 0.
  std::vector<std::pair<std::string, std::string>> users;
};

/// Parses "http://host:port" (the scheme is optional).
Result<RemoteOptions> parse_server_url(const std::string& url);

/// A live gateway reached over HTTP and WebSocket, with real time.
class RemoteWorld final : public World {
 public:
  explicit RemoteWorld(RemoteOptions options);
  ~RemoteWorld() override;

  std::string mode() const override { return "remote"; }
  Result<SessionId> create_session(const std::string& name, int cols, int rows) override;
  Result<std::unique_ptr<Link>> connect(const SessionId& session, int user) override;
  void advance(std::int64_t ms) override;
  std::int64_t now_ms() const override;
  bool quiet() const override { return true; }
  Result<Session> server_state(const SessionId& session) override;

  /// Logs in as `user` and returns the bearer token.
  Result<std::string> token(int user);
  Result<std::string> get(const std::string& path);

  struct Channel;

 private:
  RemoteOptions options_;
  std::map<int, std::string> tokens_;
  std::vector<std::weak_ptr<Channel>> channels_;
  SystemClock clock_;
};

}  // namespace wow::sim
