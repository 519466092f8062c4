#include <httplib.h>

#include <chrono>
#include <thread>

#include <json.hpp>

#include "wow/sim/world.hpp"
#include "wow/sim/ws_channel.hpp"

namespace wow::sim {

using nlohmann::json;

struct RemoteWorld::Channel {
  std::optional<WsChannel> ws;
  std::vector<Frame> inbox;
};

namespace {

class RemoteLink final : public Link {
 public:
  explicit RemoteLink(std::shared_ptr<RemoteWorld::Channel> channel) : channel_(std::move(channel)) {}
  ~RemoteLink() override { close(); }

  Status send(const std::string& text) override {
    if (!open()) return make_error(Errc::kConnectFailed, "link closed");
    return channel_->ws->send(text);
  }
  std::vector<Frame> take() override { return std::exchange(channel_->inbox, {}); }
  bool open() const override { return channel_->ws && channel_->ws->open(); }
  void close() override {
    if (channel_->ws) channel_->ws->close();
  }

 private:
  std::shared_ptr<RemoteWorld::Channel> channel_;
};

Result<json> json_body(const httplib::Result& r, int expected_status) {
  if (!r) return make_error(Errc::kConnectFailed, httplib::to_string(r.error()));
  if (r->status != expected_status) {
    return make_error(r->status == 401 ? Errc::kAuthFailed
                      : r->status == 404 ? Errc::kNoSuchSession
                                         : Errc::kMalformed,
                      "HTTP " + std::to_string(r->status) + ": " + r->body);
  }
  json j = json::parse(r->body, nullptr, false);
  if (j.is_discarded()) return make_error(Errc::kMalformed, "response is not JSON");
  return j;
}

}  // namespace

Result<RemoteOptions> parse_server_url(const std::string& url) {
  std::string_view rest = url;
  if (rest.starts_with("http://")) rest.remove_prefix(7);
  if (rest.starts_with("https://")) return make_error(Errc::kMalformed, "https is not supported");
  if (const auto slash = rest.find('/'); slash != std::string_view::npos) rest = rest.substr(0, slash);
  RemoteOptions o;
  const auto colon = rest.rfind(':');
  if (colon == std::string_view::npos) {
    o.host = std::string(rest);
    o.port = 80;
  } else {
    o.host = std::string(rest.substr(0, colon));
    try {
      const int port = std::stoi(std::string(rest.substr(colon + 1)));
      if (port <= 0 || port > 65535) throw std::out_of_range("port");
      o.port = static_cast<std::uint16_t>(port);
    } catch (const std::exception&) {
      return make_error(Errc::kMalformed, "bad port in '" + url + "'");
    }
  }
  if (o.host.empty()) return make_error(Errc::kMalformed, "no host in '" + url + "'");
  return o;
}

RemoteWorld::RemoteWorld(RemoteOptions options) : options_(std::move(options)) {}
RemoteWorld::~RemoteWorld() = default;

Result<std::string> RemoteWorld::token(int user) {
  const int index = user < 0 ? 0 : user;
  if (auto it = tokens_.find(index); it != tokens_.end()) return it->second;
  if (index >= static_cast<int>(options_.users.size())) {
    return make_error(Errc::kAuthFailed, "no credentials for simulated user " + std::to_string(index));
  }
  httplib::Client http(options_.host, options_.port);
  http.set_connection_timeout(5, 0);
  const auto& [name, secret] = options_.users[index];
  auto body = json_body(http.Post("/api/login", json{{"name", name}, {"secret", secret}}.dump(),
                                  "application/json"),
                        200);
  if (!body) return body.error().code == Errc::kConnectFailed ? body.error()
                                                             : make_error(Errc::kAuthFailed, body.error().detail);
  tokens_[index] = body->at("token").get<std::string>();
  return tokens_[index];
}

Result<std::string> RemoteWorld::get(const std::string& path) {
  auto t = token(0);
  if (!t) return t.error();
  httplib::Client http(options_.host, options_.port);
  http.set_read_timeout(30, 0);
  auto r = http.Get(path, {{"Authorization", "Bearer " + *t}});
  if (!r) return make_error(Errc::kConnectFailed, httplib::to_string(r.error()));
  if (r->status == 404) return make_error(Errc::kNoSuchSession, path);
  if (r->status != 200) return make_error(Errc::kMalformed, "HTTP " + std::to_string(r->status));
  return r->body;
}

Result<SessionId> RemoteWorld::create_session(const std::string& name, int cols, int rows) {
  auto t = token(0);
  if (!t) return t.error();
  httplib::Client http(options_.host, options_.port);
  auto body = json_body(http.Post("/api/sessions", {{"Authorization", "Bearer " + *t}},
                                  json{{"name", name}, {"gridCols", cols}, {"gridRows", rows}}.dump(),
                                  "application/json"),
                        201);
  if (!body) return body.error();
  return SessionId(body->at("sessionId").get<std::string>());
}

Result<std::unique_ptr<Link>> RemoteWorld::connect(const SessionId& session, int user) {
  auto t = token(user);
  if (!t) return t.error();
  int status = 0;
  auto ws = WsChannel::connect(options_.host, options_.port,
                               "/api/sessions/" + session.str() + "/channel?token=" + *t, &status);
  if (!ws) {
    if (status == 404) return make_error(Errc::kNoSuchSession, session.str());
    if (status == 401) return make_error(Errc::kAuthFailed, ws.error().detail);
    return ws.error();
  }
  auto channel = std::make_shared<Channel>();
  channel->ws.emplace(std::move(ws).value());
  channels_.push_back(channel);
  return std::unique_ptr<Link>(std::make_unique<RemoteLink>(channel));
}

void RemoteWorld::advance(std::int64_t ms) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
  std::erase_if(channels_, [](const auto& w) { return w.expired(); });
  do {
    for (const auto& weak : channels_) {
      auto c = weak.lock();
      if (!c || !c->ws || !c->ws->open()) continue;
      while (true) {
        auto frame = c->ws->receive(std::chrono::milliseconds(0));
        if (!frame || !*frame) break;
        c->inbox.push_back({std::move(**frame), now_ms()});
      }
    }
    if (std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  } while (true);
}

std::int64_t RemoteWorld::now_ms() const { return clock_.now_us() / 1000; }

Result<Session> RemoteWorld::server_state(const SessionId& session) {
  auto body = get("/api/sessions/" + session.str() + "/export");
  if (!body) return body.error();
  return session_from_canonical(*body);
}

}  // namespace wow::sim
