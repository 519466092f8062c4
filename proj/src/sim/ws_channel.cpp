#include "wow/sim/ws_channel.hpp"

#include <deque>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

namespace wow::sim {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

// The handshake does not expose the status of a refused upgrade, so the same
// request is replayed as plain HTTP to read it.
int refusal_status(const std::string& host, std::uint16_t port, const std::string& target) {
  net::io_context ioc;
  beast::tcp_stream stream(ioc);
  beast::error_code ec;
  tcp::resolver resolver(ioc);
  auto endpoints = resolver.resolve(host, std::to_string(port), ec);
  if (!ec) stream.connect(endpoints, ec);
  if (ec) return 0;
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, host + ":" + std::to_string(port));
  req.set(http::field::connection, "Upgrade");
  req.set(http::field::upgrade, "websocket");
  req.set(http::field::sec_websocket_version, "13");
  req.set(http::field::sec_websocket_key, "dGhlIHNhbXBsZSBub25jZQ==");
  http::write(stream, req, ec);
  if (ec) return 0;
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res, ec);
  if (ec) return 0;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return static_cast<int>(res.result_int());
}

}  // namespace

struct WsChannel::Impl {
  net::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};
  beast::flat_buffer buffer;
  std::deque<std::string> inbox;
  bool reading = false;
  bool closed = false;

  void start_read() {
    if (reading || closed) return;
    reading = true;
    ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
      reading = false;
      if (ec) {
        closed = true;
        return;
      }
      inbox.push_back(beast::buffers_to_string(buffer.data()));
      buffer.consume(buffer.size());
      start_read();
    });
  }
};

WsChannel::WsChannel(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
WsChannel::~WsChannel() { close(); }
WsChannel::WsChannel(WsChannel&&) noexcept = default;
WsChannel& WsChannel::operator=(WsChannel&&) noexcept = default;

Result<WsChannel> WsChannel::connect(const std::string& host, std::uint16_t port,
                                     const std::string& target, int* http_status) {
  auto impl = std::make_unique<Impl>();
  beast::error_code ec;
  tcp::resolver resolver(impl->ioc);
  auto endpoints = resolver.resolve(host, std::to_string(port), ec);
  if (ec) return make_error(Errc::kConnectFailed, "resolve: " + ec.message());
  net::connect(impl->ws.next_layer(), endpoints, ec);
  if (ec) return make_error(Errc::kConnectFailed, "connect: " + ec.message());
  websocket::response_type res;
  impl->ws.handshake(res, host + ":" + std::to_string(port), target, ec);
  if (ec) {
    const int status = refusal_status(host, port, target);
    if (http_status) *http_status = status;
    return make_error(Errc::kConnectFailed,
                      "handshake: " + ec.message() + " (HTTP " + std::to_string(status) + ")");
  }
  if (http_status) *http_status = static_cast<int>(res.result_int());
  impl->ws.text(true);
  impl->start_read();
  return WsChannel(std::move(impl));
}

Status WsChannel::send(const std::string& text) {
  if (!open()) return make_error(Errc::kConnectFailed, "channel closed");
  bool done = false;
  beast::error_code result;
  impl_->ws.async_write(net::buffer(text), [&](beast::error_code ec, std::size_t) {
    result = ec;
    done = true;
  });
  impl_->ioc.restart();
  while (!done && impl_->ioc.run_one() > 0) {
  }
  if (result) {
    impl_->closed = true;
    return make_error(Errc::kConnectFailed, "write: " + result.message());
  }
  return ok_status();
}

Result<std::optional<std::string>> WsChannel::receive(std::chrono::milliseconds timeout) {
  if (!impl_) return make_error(Errc::kConnectFailed, "channel closed");
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  impl_->ioc.restart();
  impl_->ioc.poll();
  impl_->ioc.restart();
  while (impl_->inbox.empty() && !impl_->closed) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) break;
    impl_->ioc.run_one_for(deadline - now);
    impl_->ioc.restart();
  }
  if (!impl_->inbox.empty()) {
    std::string text = std::move(impl_->inbox.front());
    impl_->inbox.pop_front();
    return std::optional<std::string>(std::move(text));
  }
  if (impl_->closed) return make_error(Errc::kConnectFailed, "peer closed the channel");
  return std::optional<std::string>();
}

bool WsChannel::open() const { return impl_ && !impl_->closed; }

void WsChannel::close() {
  if (!impl_ || impl_->closed) return;
  impl_->closed = true;
  beast::error_code ec;
  impl_->ws.next_layer().shutdown(tcp::socket::shutdown_both, ec);
  impl_->ws.next_layer().close(ec);
  impl_->ioc.restart();
  impl_->ioc.poll();
}

}  // namespace wow::sim
