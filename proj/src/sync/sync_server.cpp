#include "wow/sync/sync_server.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>

#include "wow/session/reducer.hpp"

namespace wow::sync {

using nlohmann::json;

struct SyncServer::Connection {
  ConnectionId id = 0;
  std::shared_ptr<Outbox> out;
  std::optional<Identity> identity;
  bool preauthenticated = false;
  bool welcomed = false;
  ParticipantRole role = ParticipantRole::kPersonalDevice;
  std::int64_t last_seen_us = 0;
  std::int64_t last_ping_us = 0;

  void send(const Envelope& env) const { out->send(encode(env)); }
};

namespace {

/// Recent request ids of one participant with the encoded outcome envelope.
struct DedupWindow {
  std::deque<std::pair<std::string, std::int64_t>> order;
  std::unordered_map<std::string, std::string> outcomes;

  const std::string* find(const std::string& request_id) const {
    auto it = outcomes.find(request_id);
    return it == outcomes.end() ? nullptr : &it->second;
  }

  void record(const std::string& request_id, std::string outcome, std::int64_t now,
              std::size_t capacity, std::int64_t window_us) {
    outcomes[request_id] = std::move(outcome);
    order.emplace_back(request_id, now);
    // Entries survive while among the newest `capacity` or younger than the window.
    while (order.size() > capacity && order.front().second < now - window_us) {
      outcomes.erase(order.front().first);
      order.pop_front();
    }
  }
};

/// Minimum spacing of forwarded Moves, rounded up so the rate is never exceeded.
std::int64_t cursor_interval_us(int rate) {
  rate = std::max(1, rate);
  return (1'000'000 + rate - 1) / rate;
}

struct CursorSlot {
  std::int64_t last_forward_us = std::numeric_limits<std::int64_t>::min() / 2;
  std::optional<CursorState> pending;
  ConnectionId from = 0;
};

}  // namespace

struct SyncServer::Hub {
  std::mutex mu;
  Session state;
  std::map<ConnectionId, Connection> conns;
  std::map<ParticipantId, DedupWindow> dedup;
  std::map<ParticipantId, CursorSlot> cursors;
  std::int64_t last_active_ms = 0;
};

SyncServer::SyncServer(persistence::SessionStore& store, const Clock& clock,
                       Authenticator authenticate, SyncConfig config)
    : store_(store), clock_(clock), authenticate_(std::move(authenticate)), config_(config) {}

SyncServer::~SyncServer() = default;

Result<Session> SyncServer::create_session(const std::string& name, int grid_cols, int grid_rows,
                                           std::optional<SessionId> id) {
  if (!id) {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    char buf[20];
    std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(rng()));
    id = SessionId(buf);
  }
  auto fresh = new_session(*id, name, grid_cols, grid_rows);
  if (!fresh) return fresh;
  std::lock_guard lock(mu_);
  if (hubs_.contains(*id)) return make_error(Errc::kInvalidName, "session exists");
  if (auto st = store_.create(*fresh); !st) return st.error();
  auto hub = std::make_shared<Hub>();
  hub->state = *fresh;
  hub->last_active_ms = clock_.now_ms();
  hubs_.emplace(*id, hub);
  return fresh;
}

Result<std::shared_ptr<SyncServer::Hub>> SyncServer::hub_for(const SessionId& id) {
  std::lock_guard lock(mu_);
  if (auto it = hubs_.find(id); it != hubs_.end()) return it->second;
  auto restored = store_.restore(id);
  if (!restored) {
    if (restored.error().code == Errc::kNoSuchSession) return restored.error();
    return make_error(Errc::kRestoreFailed, restored.error().to_string());
  }
  auto hub = std::make_shared<Hub>();
  hub->state = std::move(restored->session);
  hub->last_active_ms = clock_.now_ms();
  // Retries may straddle a restart, so accepted requests still inside the
  // dedup window are remembered from the journal. Rejects are not durable;
  // a retried reject is simply evaluated again.
  auto journal = store_.events_after(id, 0);
  if (!journal && restored->report.snapshot_version) {
    journal = store_.events_after(id, *restored->report.snapshot_version);
  }
  if (journal) {
    for (const auto& e : *journal) {
      if (e.request_id.empty()) continue;
      hub->dedup[e.actor].record(e.request_id, encode(make_event(id, e)), e.server_time * 1000,
                                 config_.dedup_capacity, config_.dedup_window_us);
    }
  }
  // Nobody is connected to a freshly restored session. The departures are
  // journaled like any other event so replay keeps matching the live state.
  std::vector<ParticipantId> stale;
  for (const auto& [pid, p] : hub->state.participants) {
    if (p.connected) stale.push_back(pid);
  }
  for (const auto& pid : stale) {
    if (auto st = commit(*hub, LeaveParticipant{pid}, pid,
                         "server-" + std::to_string(hub->state.version + 1));
        !st) {
      return make_error(Errc::kRestoreFailed, st.error().to_string());
    }
  }
  hubs_.emplace(id, hub);
  return hub;
}

std::shared_ptr<SyncServer::Hub> SyncServer::hub_of(ConnectionId conn) {
  std::lock_guard lock(mu_);
  auto it = connections_.find(conn);
  return it == connections_.end() ? nullptr : it->second;
}

Result<Session> SyncServer::session(const SessionId& id) {
  auto hub = hub_for(id);
  if (!hub) return hub.error();
  std::lock_guard lock((*hub)->mu);
  return (*hub)->state;
}

Result<SessionSummary> SyncServer::summary(const SessionId& id) {
  auto hub = hub_for(id);
  if (!hub) return hub.error();
  std::lock_guard lock((*hub)->mu);
  const Session& s = (*hub)->state;
  SessionSummary out{s.id, s.name, (*hub)->last_active_ms, 0, s.version};
  for (const auto& [pid, p] : s.participants) out.participant_count += p.connected ? 1 : 0;
  return out;
}

std::vector<SessionSummary> SyncServer::list_sessions() {
  std::set<SessionId> ids;
  for (auto& id : store_.list_sessions()) ids.insert(id);
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, hub] : hubs_) ids.insert(id);
  }
  std::vector<SessionSummary> out;
  for (const auto& id : ids) {
    if (auto s = summary(id)) out.push_back(std::move(s).value());
  }
  return out;
}

Result<ConnectionId> SyncServer::open(const SessionId& id, std::shared_ptr<Outbox> outbox,
                                      std::optional<Identity> preauthenticated) {
  auto hub = hub_for(id);
  if (!hub) return hub.error();
  ConnectionId conn_id;
  {
    std::lock_guard lock(mu_);
    conn_id = next_connection_++;
    connections_.emplace(conn_id, *hub);
  }
  std::lock_guard lock((*hub)->mu);
  Connection conn;
  conn.id = conn_id;
  conn.out = std::move(outbox);
  conn.preauthenticated = preauthenticated.has_value();
  conn.identity = std::move(preauthenticated);
  conn.last_seen_us = conn.last_ping_us = clock_.now_us();
  (*hub)->conns.emplace(conn_id, std::move(conn));
  return conn_id;
}

void SyncServer::receive(ConnectionId conn_id, std::string_view text) {
  auto hub = hub_of(conn_id);
  if (!hub) return;
  std::lock_guard lock(hub->mu);
  auto it = hub->conns.find(conn_id);
  if (it == hub->conns.end()) return;
  Connection& conn = it->second;
  conn.last_seen_us = clock_.now_us();
  const SessionId& sid = hub->state.id;

  auto env = decode(text);
  if (!env) {
    conn.send(make_reject(sid, std::nullopt, env.error()));
    return;
  }
  if (env->session != sid) {
    conn.send(make_reject(sid, env->request_id,
                          make_error(Errc::kNoSuchSession, "connection belongs to " + sid.str())));
    return;
  }
  switch (env->type) {
    case MessageType::kHello:
      on_hello(*hub, conn, *env);
      return;
    case MessageType::kCommand:
      on_command(*hub, conn, *env);
      return;
    case MessageType::kCursor:
      on_cursor(*hub, conn, *env);
      return;
    case MessageType::kPing:
      conn.send(Envelope{MessageType::kPong, sid, std::string(kServerSender), std::nullopt,
                         std::nullopt, env->payload});
      return;
    case MessageType::kPong:
      return;
    default:
      conn.send(make_reject(sid, env->request_id,
                            make_error(Errc::kMalformed, "clients may not send " +
                                                             std::string(message_type_name(env->type)))));
  }
}

void SyncServer::on_hello(Hub& hub, Connection& conn, const Envelope& env) {
  const SessionId sid = hub.state.id;
  if (conn.welcomed) {
    conn.send(make_reject(sid, std::nullopt, make_error(Errc::kMalformed, "duplicate Hello")));
    return;
  }
  auto fail = [&](const Error& error) {
    conn.send(make_reject(sid, std::nullopt, error));
    conn.out->close();
    hub.conns.erase(conn.id);
  };
  auto hello = hello_from_json(env.payload);
  if (!hello) return fail(hello.error());
  if (hello->proto_version != kProtoVersion) {
    return fail(make_error(Errc::kUnsupportedProtocol,
                           "server speaks protoVersion " + std::to_string(kProtoVersion)));
  }
  if (!conn.preauthenticated) {
    if (!hello->token) return fail(make_error(Errc::kAuthFailed, "missing token"));
    auto identity = authenticate_(*hello->token);
    if (!identity) return fail(make_error(Errc::kAuthFailed, identity.error().detail));
    conn.identity = std::move(identity).value();
  }
  conn.role = hello->role;
  conn.welcomed = true;
  conn.send(Envelope{MessageType::kWelcome, sid, std::string(kServerSender), std::nullopt,
                     std::nullopt,
                     json{{"protoVersion", kProtoVersion},
                          {"participantId", conn.identity->participant},
                          {"heartbeatMs", config_.heartbeat_us / 1000},
                          {"maxCursorRate", config_.max_cursor_rate}}});

  // Resync: a backlog when the journal still covers the gap, else a snapshot.
  bool sent_backlog = false;
  if (hello->last_acked_seq && *hello->last_acked_seq <= hub.state.version) {
    if (auto backlog = store_.events_after(sid, *hello->last_acked_seq)) {
      for (const auto& e : *backlog) conn.send(make_event(sid, e));
      sent_backlog = true;
    }
  }
  if (!sent_backlog) conn.send(make_snapshot(hub.state));

  const ConnectionId id = conn.id;
  auto joined = commit(hub, JoinParticipant{conn.identity->participant, conn.identity->display_name,
                                            conn.role},
                       conn.identity->participant,
                       "server-" + std::to_string(hub.state.version + 1));
  if (!joined) {
    auto it = hub.conns.find(id);
    if (it != hub.conns.end()) fail(joined.error());
    return;
  }
  broadcast_presence(hub);
}

void SyncServer::on_command(Hub& hub, Connection& conn, const Envelope& env) {
  const SessionId sid = hub.state.id;
  if (!conn.welcomed) {
    conn.send(make_reject(sid, env.request_id, make_error(Errc::kAuthFailed, "send Hello first")));
    return;
  }
  if (!env.request_id || env.request_id->empty()) {
    conn.send(make_reject(sid, std::nullopt, make_error(Errc::kMalformed, "missing requestId")));
    return;
  }
  const std::string& request_id = *env.request_id;
  const ParticipantId actor = conn.identity->participant;
  DedupWindow& window = hub.dedup[actor];
  if (const std::string* outcome = window.find(request_id)) {
    conn.out->send(*outcome);
    return;
  }
  auto record = [&](std::string outcome) {
    window.record(request_id, std::move(outcome), clock_.now_us(), config_.dedup_capacity,
                  config_.dedup_window_us);
  };
  auto reject = [&](const Error& error) {
    std::string text = encode(make_reject(sid, request_id, error));
    conn.out->send(text);
    record(std::move(text));
  };

  auto command = command_from_json(env.payload);
  if (!command) return reject(command.error());
  if (std::holds_alternative<JoinParticipant>(*command) ||
      std::holds_alternative<LeaveParticipant>(*command)) {
    return reject(make_error(Errc::kForbidden, "presence is managed by the server"));
  }
  auto event = commit(hub, *command, actor, request_id);
  if (!event) {
    // Storage failures are transient; a retry must be allowed to succeed.
    if (event.error().code == Errc::kStorageUnavailable) {
      conn.send(make_reject(sid, request_id, event.error()));
      return;
    }
    return reject(event.error());
  }
  record(std::move(event).value());
}

Result<std::string> SyncServer::commit(Hub& hub, const Command& command, const ParticipantId& actor,
                                       const std::string& request_id) {
  auto applied = apply_command(hub.state, command, CommandMeta{actor, clock_.now_ms(), request_id});
  if (!applied) return applied.error();
  if (auto st = store_.append(hub.state.id, applied->event); !st) return st.error();
  hub.state = std::move(applied->session);
  hub.last_active_ms = clock_.now_ms();
  std::string text = encode(make_event(hub.state.id, applied->event));
  broadcast(hub, text);
  maybe_snapshot(hub);
  return text;
}

void SyncServer::broadcast(Hub& hub, const std::string& text, std::optional<ConnectionId> except) {
  for (auto& [id, conn] : hub.conns) {
    if (conn.welcomed && id != except) conn.out->send(text);
  }
}

void SyncServer::broadcast_presence(Hub& hub) {
  json participants = json::array();
  for (const auto& [id, p] : hub.state.participants) participants.push_back(p);
  broadcast(hub, encode(Envelope{MessageType::kPresence, hub.state.id, std::string(kServerSender),
                                 std::nullopt, std::nullopt,
                                 json{{"participants", participants}}}));
}

void SyncServer::on_cursor(Hub& hub, Connection& conn, const Envelope& env) {
  if (!conn.welcomed) return;
  CursorState cursor;
  try {
    cursor = env.payload.get<CursorState>();
  } catch (const json::exception&) {
    return;  // lossy channel: malformed cursors are dropped
  }
  if (!std::isfinite(cursor.x) || !std::isfinite(cursor.y) || cursor.x < 0.0 || cursor.x > 1.0 ||
      cursor.y < 0.0 || cursor.y > 1.0) {
    return;
  }
  if (cursor.wall.empty()) cursor.wall = hub.state.active_wall;
  if (hub.state.find_wall(cursor.wall) == nullptr) return;
  cursor.owner = conn.identity->participant;
  auto p = hub.state.participants.find(cursor.owner);
  cursor.label = p != hub.state.participants.end() ? p->second.display_name
                                                   : conn.identity->display_name;

  CursorSlot& slot = hub.cursors[cursor.owner];
  slot.from = conn.id;
  const std::int64_t now = clock_.now_us();
  if (cursor.action != CursorAction::kMove) {
    slot.pending.reset();  // the action carries the newer position
    forward_cursor(hub, cursor, conn.id);
    return;
  }
  const std::int64_t interval = cursor_interval_us(config_.max_cursor_rate);
  if (now - slot.last_forward_us >= interval) {
    slot.pending.reset();
    slot.last_forward_us = now;
    forward_cursor(hub, cursor, conn.id);
  } else {
    slot.pending = cursor;
  }
}

void SyncServer::forward_cursor(Hub& hub, const CursorState& cursor, ConnectionId from) {
  broadcast(hub, encode(make_cursor(hub.state.id, cursor)), from);
}

void SyncServer::maybe_snapshot(Hub& hub) {
  if (store_.snapshot_due(hub.state)) {
    // A failed snapshot only lengthens the next restore; the journal is intact.
    (void)store_.write_snapshot(hub.state);
  }
}

void SyncServer::drop(Hub& hub, ConnectionId conn_id) {
  auto it = hub.conns.find(conn_id);
  if (it == hub.conns.end()) return;
  const bool welcomed = it->second.welcomed;
  const std::optional<Identity> identity = it->second.identity;
  hub.conns.erase(it);
  if (!welcomed || !identity) return;
  for (const auto& [id, other] : hub.conns) {
    if (other.welcomed && other.identity->participant == identity->participant) return;
  }
  hub.cursors.erase(identity->participant);
  auto p = hub.state.participants.find(identity->participant);
  if (p == hub.state.participants.end() || !p->second.connected) return;
  (void)commit(hub, LeaveParticipant{identity->participant}, identity->participant,
               "server-" + std::to_string(hub.state.version + 1));
  broadcast_presence(hub);
}

void SyncServer::close(ConnectionId conn_id) {
  auto hub = hub_of(conn_id);
  {
    std::lock_guard lock(mu_);
    connections_.erase(conn_id);
  }
  if (!hub) return;
  std::lock_guard lock(hub->mu);
  drop(*hub, conn_id);
}

void SyncServer::tick() {
  std::vector<std::shared_ptr<Hub>> hubs;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, hub] : hubs_) hubs.push_back(hub);
  }
  const std::int64_t interval = cursor_interval_us(config_.max_cursor_rate);
  for (const auto& hub : hubs) {
    std::lock_guard lock(hub->mu);
    const std::int64_t now = clock_.now_us();
    std::vector<ConnectionId> dead;
    for (auto& [id, conn] : hub->conns) {
      if (now - conn.last_seen_us > config_.heartbeat_us * config_.missed_heartbeats) {
        dead.push_back(id);
      } else if (now - conn.last_ping_us >= config_.heartbeat_us) {
        conn.last_ping_us = now;
        conn.send(Envelope{MessageType::kPing, hub->state.id, std::string(kServerSender),
                           std::nullopt, std::nullopt, json{{"t", now / 1000}}});
      }
    }
    for (ConnectionId id : dead) {
      hub->conns.at(id).out->close();
      drop(*hub, id);
    }
    for (auto& [owner, slot] : hub->cursors) {
      if (slot.pending && now - slot.last_forward_us >= interval) {
        CursorState cursor = *slot.pending;
        slot.pending.reset();
        slot.last_forward_us = now;
        forward_cursor(*hub, cursor, slot.from);
      }
    }
    maybe_snapshot(*hub);
  }
}

}  // namespace wow::sync
