#include "wow/gateway/gateway_server.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cctype>
#include <deque>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include "wow/gateway/auth.hpp"
#include "wow/gateway/http_api.hpp"
#include "wow/persistence/blob_store.hpp"
#include "wow/persistence/session_store.hpp"
#include "wow/persistence/storage.hpp"

namespace wow::gateway {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

// Multipart framing on top of the file itself.
constexpr std::uint64_t kMultipartSlack = 64 * 1024;
constexpr auto kHttpTimeout = std::chrono::seconds(300);
constexpr auto kTickInterval = std::chrono::milliseconds(5);

HttpRequest to_api_request(const http::request<http::string_body>& req) {
  HttpRequest out;
  out.method = std::string(req.method_string());
  out.target = std::string(req.target());
  for (const auto& field : req) {
    std::string name(field.name_string());
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.headers[name] = std::string(field.value());
  }
  out.body = req.body();
  return out;
}

auto to_beast_response(HttpResponse r, unsigned version, bool keep_alive, bool head) {
  auto res = std::make_shared<http::response<http::string_body>>(
      static_cast<http::status>(r.status), version);
  res->set(http::field::server, "wow-gateway");
  res->set(http::field::content_type, r.content_type);
  for (const auto& [name, value] : r.headers) res->set(name, value);
  res->keep_alive(keep_alive);
  const auto size = r.body.size();
  res->body() = std::move(r.body);
  res->prepare_payload();
  if (head) {
    res->body().clear();
    res->content_length(size);
  }
  return res;
}

class WsSession;

/// Queues frames on the connection's strand; never touches the server.
class WsOutbox final : public sync::Outbox {
 public:
  explicit WsOutbox(std::weak_ptr<WsSession> session) : session_(std::move(session)) {}
  void send(std::string text) override;
  void close() override;

 private:
  std::weak_ptr<WsSession> session_;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, sync::SyncServer& sync)
      : ws_(std::move(socket)), sync_(sync) {}

  void run(http::request<http::string_body> req, ChannelGrant grant) {
    grant_ = std::move(grant);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.set_option(websocket::stream_base::decorator([](websocket::response_type& res) {
      res.set(http::field::server, "wow-gateway");
    }));
    ws_.read_message_max(16 * 1024 * 1024);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void enqueue(std::string text) {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      if (self->closing_) return;
      self->queue_.push_back(std::move(text));
      if (!self->writing_) self->do_write();
    });
  }

  void request_close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closing_) return;
      self->closing_ = true;
      if (!self->writing_) self->do_close();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    auto outbox = std::make_shared<WsOutbox>(weak_from_this());
    auto conn = sync_.open(grant_.session, outbox, grant_.identity);
    if (!conn) {
      closing_ = true;
      do_close();
      return;
    }
    conn_ = *conn;
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      if (conn_) sync_.close(*conn_);
      conn_.reset();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    sync_.receive(*conn_, text);
    do_read();
  }

  void do_write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) {
      queue_.clear();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      do_write();
    } else if (closing_) {
      do_close();
    }
  }

  void do_close() {
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  sync::SyncServer& sync_;
  beast::flat_buffer buffer_;
  ChannelGrant grant_;
  std::optional<sync::ConnectionId> conn_;
  std::deque<std::string> queue_;
  bool writing_ = false;
  bool closing_ = false;
};

void WsOutbox::send(std::string text) {
  if (auto s = session_.lock()) s->enqueue(std::move(text));
}

void WsOutbox::close() {
  if (auto s = session_.lock()) s->request_close();
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, const HttpApi& api, sync::SyncServer& sync,
              std::uint64_t body_limit)
      : stream_(std::move(socket)), api_(api), sync_(sync), body_limit_(body_limit) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    parser_.emplace();
    // The declared length is checked by hand in on_header; the parser would
    // otherwise fail during the header read and the 413 could not be sent.
    parser_->body_limit(std::numeric_limits<std::uint64_t>::max());
    stream_.expires_after(kHttpTimeout);
    http::async_read_header(stream_, buffer_, *parser_,
                            beast::bind_front_handler(&HttpSession::on_header, shared_from_this()));
  }

  void on_header(beast::error_code ec, std::size_t) {
    if (ec) return on_read(ec, 0);
    const auto length = parser_->content_length();
    if (length && *length > body_limit_) {
      // Drain the body before answering so the client gets to read the 413.
      discard_.emplace(std::move(*parser_));
      discard_->body_limit(std::numeric_limits<std::uint64_t>::max());
      return discard_body();
    }
    parser_->body_limit(body_limit_);
    http::async_read(stream_, buffer_, *parser_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void discard_body() {
    discard_->get().body().data = scratch_.data();
    discard_->get().body().size = scratch_.size();
    http::async_read_some(stream_, buffer_, *discard_,
                          [self = shared_from_this()](beast::error_code ec, std::size_t) {
                            if (ec == http::error::need_buffer) ec = {};
                            if (ec) return;
                            if (!self->discard_->is_done()) return self->discard_body();
                            const unsigned version = self->discard_->get().version();
                            self->discard_.reset();
                            self->write(to_beast_response(
                                json_error(413, Errc::kInvalidContent, "request body too large"),
                                version, false, false));
                          });
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return shutdown();
    if (ec == http::error::body_limit) {
      const unsigned version = parser_->get().version();
      return write(to_beast_response(json_error(413, Errc::kInvalidContent, "request body too large"),
                                     version, false, false));
    }
    if (ec) return;

    auto req = parser_->release();
    if (websocket::is_upgrade(req)) {
      auto grant = api_.authorize_channel(to_api_request(req));
      if (auto* refused = std::get_if<HttpResponse>(&grant)) {
        return write(to_beast_response(std::move(*refused), req.version(), false, false));
      }
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), sync_)
          ->run(std::move(req), std::get<ChannelGrant>(std::move(grant)));
      return;
    }
    const bool head = req.method() == http::verb::head;
    write(to_beast_response(api_.handle(to_api_request(req)), req.version(), req.keep_alive(), head));
  }

  void write(std::shared_ptr<http::response<http::string_body>> res) {
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (!res->keep_alive()) return self->shutdown();
                        self->do_read();
                      });
  }

  void shutdown() {
    beast::error_code ignored;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  std::optional<http::request_parser<http::buffer_body>> discard_;
  std::array<char, 64 * 1024> scratch_{};
  const HttpApi& api_;
  sync::SyncServer& sync_;
  std::uint64_t body_limit_;
};

}  // namespace

struct GatewayServer::Impl {
  GatewayConfig config;
  SystemClock system_clock;
  const Clock& clock;
  std::shared_ptr<persistence::FileStorage> storage;
  persistence::SessionStore store;
  persistence::BlobStore blobs;
  TokenAuthenticator auth;
  sync::SyncServer sync;
  HttpApi api;

  net::io_context ioc;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
  tcp::acceptor acceptor{ioc};
  net::steady_timer ticker{net::make_strand(ioc)};
  std::vector<std::thread> threads;
  std::uint16_t port = 0;
  bool running = false;

  Impl(GatewayConfig c, const Clock* external)
      : config(std::move(c)),
        clock(external ? *external : system_clock),
        storage(std::make_shared<persistence::FileStorage>(config.storage_root)),
        store(storage, clock),
        blobs(storage),
        auth(clock, config.users, config.token_ttl_seconds),
        sync(store, clock,
             [this](std::string_view token) { return auth.verify(token); },
             sync::SyncConfig{.heartbeat_us = config.heartbeat_ms * 1000,
                              .max_cursor_rate = config.max_cursor_rate}),
        api(config, sync, blobs, auth) {}

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (!acceptor.is_open()) return;
      if (!ec) {
        std::make_shared<HttpSession>(std::move(socket), api, sync,
                                      config.upload_limit_bytes + kMultipartSlack)
            ->run();
      }
      accept();
    });
  }

  void schedule_tick() {
    ticker.expires_after(kTickInterval);
    ticker.async_wait([this](beast::error_code ec) {
      if (ec) return;
      sync.tick();
      schedule_tick();
    });
  }
};

GatewayServer::GatewayServer(GatewayConfig config, const Clock* clock)
    : impl_(std::make_unique<Impl>(std::move(config), clock)) {}

GatewayServer::~GatewayServer() { stop(); }

Status GatewayServer::start() {
  auto& m = *impl_;
  if (m.running) return ok_status();
  beast::error_code ec;
  const auto address = net::ip::make_address(m.config.bind, ec);
  if (ec) return make_error(Errc::kMalformed, "bind address '" + m.config.bind + "'");
  const tcp::endpoint endpoint{address, m.config.port};
  m.acceptor.open(endpoint.protocol(), ec);
  if (!ec) m.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) m.acceptor.bind(endpoint, ec);
  if (!ec) m.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) return make_error(Errc::kConnectFailed, "listen: " + ec.message());
  m.port = m.acceptor.local_endpoint().port();

  m.work.emplace(m.ioc.get_executor());
  m.accept();
  m.schedule_tick();
  for (int i = 0; i < m.config.threads; ++i) {
    m.threads.emplace_back([&m] { m.ioc.run(); });
  }
  m.running = true;
  return ok_status();
}

void GatewayServer::stop() {
  auto& m = *impl_;
  if (!m.running) return;
  m.running = false;
  m.work.reset();
  m.ioc.stop();
  for (auto& t : m.threads) t.join();
  m.threads.clear();
  beast::error_code ignored;
  m.acceptor.close(ignored);
  m.ticker.cancel();
}

std::uint16_t GatewayServer::port() const { return impl_->port; }

sync::SyncServer& GatewayServer::sync() { return impl_->sync; }

}  // namespace wow::gateway
