#include <algorithm>

#include "wow/sim/world.hpp"
#include "wow/sync/protocol.hpp"

namespace wow::sim {

std::string user_name(int user) {
  return user < 0 ? "auditor" : "sim" + std::to_string(user + 1);
}

namespace {

struct Pending {
  std::int64_t due_us = 0;
  std::uint64_t order = 0;
  std::string text;
  std::int64_t sent_ms = 0;
};

}  // namespace

struct InProcessWorld::Pipe {
  sync::ConnectionId conn = 0;
  std::deque<Pending> up;    // client to server
  std::deque<Pending> down;  // server to client
  std::vector<Frame> inbox;
  std::int64_t last_up_us = 0;
  std::int64_t last_down_us = 0;
  bool client_closed = false;
  bool server_closing = false;  // closes once `down` drains
  bool dead = false;
};

namespace {

class SimOutbox final : public sync::Outbox {
 public:
  SimOutbox(std::weak_ptr<InProcessWorld::Pipe> pipe, std::function<void(InProcessWorld::Pipe&, std::string)> push)
      : pipe_(std::move(pipe)), push_(std::move(push)) {}
  void send(std::string text) override {
    if (auto p = pipe_.lock()) push_(*p, std::move(text));
  }
  void close() override {
    if (auto p = pipe_.lock()) p->server_closing = true;
  }

 private:
  std::weak_ptr<InProcessWorld::Pipe> pipe_;
  std::function<void(InProcessWorld::Pipe&, std::string)> push_;
};

class SimLink final : public Link {
 public:
  SimLink(std::shared_ptr<InProcessWorld::Pipe> pipe, std::function<void(InProcessWorld::Pipe&, const std::string&)> push,
          std::function<void(InProcessWorld::Pipe&)> on_close)
      : pipe_(std::move(pipe)), push_(std::move(push)), on_close_(std::move(on_close)) {}
  ~SimLink() override { close(); }

  Status send(const std::string& text) override {
    if (!open()) return make_error(Errc::kConnectFailed, "link closed");
    push_(*pipe_, text);
    return ok_status();
  }
  std::vector<Frame> take() override { return std::exchange(pipe_->inbox, {}); }
  bool open() const override { return !pipe_->dead && !pipe_->client_closed; }
  void close() override {
    if (pipe_->client_closed) return;
    pipe_->client_closed = true;
    on_close_(*pipe_);
  }

 private:
  std::shared_ptr<InProcessWorld::Pipe> pipe_;
  std::function<void(InProcessWorld::Pipe&, const std::string&)> push_;
  std::function<void(InProcessWorld::Pipe&)> on_close_;
};

}  // namespace

InProcessWorld::InProcessWorld(InProcessOptions options)
    : options_(options), rng_(options.seed ^ 0x5eed5eed5eedull),
      storage_(std::make_shared<persistence::MemoryStorage>()) {
  build_server();
}

InProcessWorld::~InProcessWorld() = default;

void InProcessWorld::build_server() {
  store_ = std::make_unique<persistence::SessionStore>(storage_, clock_, options_.persistence);
  server_ = std::make_unique<sync::SyncServer>(
      *store_, clock_,
      [](std::string_view) -> Result<sync::Identity> {
        return make_error(Errc::kAuthFailed, "in-process connections are preauthenticated");
      },
      options_.sync);
}

Result<SessionId> InProcessWorld::create_session(const std::string& name, int cols, int rows) {
  // Fixed ids keep runs byte-identical.
  const SessionId id("sim-" + std::to_string(order_++));
  auto s = server_->create_session(name, cols, rows, id);
  if (!s) return s.error();
  return s->id;
}

Result<std::unique_ptr<Link>> InProcessWorld::connect(const SessionId& session, int user) {
  auto pipe = std::make_shared<Pipe>();
  auto push_down = [this](Pipe& p, std::string text) {
    const std::int64_t delay = options_.max_delay_ms > 0
                                   ? static_cast<std::int64_t>(rng_.below(options_.max_delay_ms + 1)) * 1000
                                   : 0;
    p.last_down_us = std::max(p.last_down_us, clock_.now_us() + delay);
    p.down.push_back({p.last_down_us, order_++, std::move(text), clock_.now_us() / 1000});
  };
  auto outbox = std::make_shared<SimOutbox>(pipe, push_down);
  const std::string name = user_name(user);
  auto conn = server_->open(session, outbox, sync::Identity{ParticipantId(name), name});
  if (!conn) return conn.error();
  pipe->conn = *conn;
  pipes_.push_back(pipe);

  auto push_up = [this](Pipe& p, const std::string& text) {
    auto schedule = [&](std::int64_t delay_ms) {
      p.last_up_us = std::max(p.last_up_us, clock_.now_us() + delay_ms * 1000);
      p.up.push_back({p.last_up_us, order_++, text, clock_.now_us() / 1000});
    };
    schedule(options_.max_delay_ms > 0 ? static_cast<std::int64_t>(rng_.below(options_.max_delay_ms + 1)) : 0);
    if (options_.duplicate_commands > 0 && text.find("\"type\":\"Command\"") != std::string::npos &&
        rng_.chance(options_.duplicate_commands)) {
      schedule(static_cast<std::int64_t>(rng_.below(options_.max_delay_ms + 5)));
    }
  };
  auto on_close = [this](Pipe& p) {
    p.up.clear();
    p.down.clear();
    if (!p.dead && server_) server_->close(p.conn);
    p.dead = true;
  };
  return std::unique_ptr<Link>(std::make_unique<SimLink>(pipe, push_up, on_close));
}

void InProcessWorld::deliver_due() {
  const std::int64_t now = clock_.now_us();
  while (true) {
    // Earliest due frame over every pipe and both directions.
    Pipe* best = nullptr;
    bool upward = false;
    const Pending* best_frame = nullptr;
    for (const auto& p : pipes_) {
      if (p->dead) continue;
      for (bool up : {true, false}) {
        const auto& q = up ? p->up : p->down;
        if (q.empty() || q.front().due_us > now) continue;
        const Pending& f = q.front();
        if (!best_frame || f.due_us < best_frame->due_us ||
            (f.due_us == best_frame->due_us && f.order < best_frame->order)) {
          best = p.get();
          upward = up;
          best_frame = &f;
        }
      }
    }
    if (!best) break;
    if (upward) {
      Pending f = std::move(best->up.front());
      best->up.pop_front();
      server_->receive(best->conn, f.text);
    } else {
      Pending f = std::move(best->down.front());
      best->down.pop_front();
      best->inbox.push_back({std::move(f.text), f.sent_ms});
    }
  }
  for (const auto& p : pipes_) {
    if (p->server_closing && p->down.empty() && !p->dead) {
      p->dead = true;
      p->up.clear();
    }
  }
  std::erase_if(pipes_, [](const auto& p) { return p->dead && p.use_count() == 1; });
}

void InProcessWorld::advance(std::int64_t ms) {
  deliver_due();
  for (std::int64_t i = 0; i < ms; ++i) {
    clock_.advance_ms(1);
    server_->tick();
    deliver_due();
  }
}

std::int64_t InProcessWorld::now_ms() const { return clock_.now_us() / 1000; }

bool InProcessWorld::quiet() const {
  for (const auto& p : pipes_) {
    if (!p->dead && (!p->up.empty() || !p->down.empty())) return false;
  }
  return true;
}

Result<Session> InProcessWorld::server_state(const SessionId& session) {
  return server_->session(session);
}

Status InProcessWorld::restart() {
  for (const auto& p : pipes_) {
    p->dead = true;
    p->up.clear();
    p->down.clear();
  }
  server_.reset();
  store_.reset();
  build_server();
  return ok_status();
}

}  // namespace wow::sim
