// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/gateway/server.hpp"

#include <deque>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "sds/error.hpp"
#include "sds/gateway/catalog.hpp"
#include "sds/gateway/channel.hpp"
#include "sds/orchestrator/session.hpp"
#include "sds/protocol/registry.hpp"

namespace sds::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::optional<std::string> query_param(std::string_view target, std::string_view key) {
  const auto q = target.find('?');
  if (q == std::string_view::npos) return std::nullopt;
  auto rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const auto pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    if (pair.substr(0, eq) == key) {
      return eq == std::string_view::npos ? std::string() : std::string(pair.substr(eq + 1));
    }
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return std::nullopt;
}

namespace {

int status_for(Errc code) {
  switch (code) {
    case Errc::UnknownSession:
    case Errc::UnknownModel:
    case Errc::UnknownWorker:
      return 404;
    case Errc::NoWorkerForTask:
      return 503;
    case Errc::WorkerTimeout:
      return 504;
    case Errc::WorkerError:
      return 502;
    default:
      return 400;
  }
}

HttpResult error_result(int status, std::string_view code, const std::string& message) {
  return {status, {{"error", code}, {"message", message}}};
}

std::string_view path_of(std::string_view target) { return target.substr(0, target.find('?')); }

std::string_view view(beast::string_view s) { return {s.data(), s.size()}; }

}  // namespace

HttpResult handle_rest(SessionManager& manager, const std::string& method, const std::string& target,
                       const std::string& body) {
  const auto path = path_of(target);
  try {
    if (path == "/healthz" && method == "GET") {
      return {200,
              {{"status", "ok"},
               {"workers", manager.registry().size()},
               {"sessions", manager.ids().size()}}};
    }
    if (path == "/models" && method == "GET") return {200, to_json(build_catalog(manager.registry()))};
    if (path == "/sessions" && method == "POST") {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(body);
      } catch (const nlohmann::json::exception&) {
        return error_result(400, "ParseError", "body must be a JSON pipeline config");
      }
      if (j.is_object() && j.contains("config")) j = j["config"];
      const auto config = j.get<orch::PipelineConfig>();
      const auto id = manager.create(config);
      return {201, {{"session_id", id}, {"config", config}}};
    }
    constexpr std::string_view prefix = "/sessions/";
    constexpr std::string_view suffix = "/metrics";
    if (method == "GET" && path.size() > prefix.size() + suffix.size() && path.starts_with(prefix) &&
        path.ends_with(suffix)) {
      const auto id = path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
      return {200, manager.metrics_json(std::string(id))};
    }
  } catch (const Error& e) {
    return error_result(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_result(500, "Internal", e.what());
  }
  return error_result(404, "NotFound", std::string(path));
}

namespace {

using Pool = asio::thread_pool;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, SessionManager& manager, Pool& pool)
      : ws_(std::move(socket)),
        manager_(manager),
        inbound_(asio::make_strand(pool.get_executor())),
        timer_(ws_.get_executor()) {}

  void start(http::request<http::string_body> req) {
    const auto id = query_param(view(req.target()), "id");
    session_id_ = id.value_or("");
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  struct Outgoing {
    bool binary = false;
    std::string data;
  };

  void on_accept(beast::error_code ec) {
    if (ec) return;
    auto self = shared_from_this();
    asio::post(inbound_, [self] {
      try {
        self->channel_ = std::make_unique<SessionChannel>(
            self->manager_, self->session_id_,
            ChannelOutput{[weak = std::weak_ptr(self)](ServerMessage m) {
                            if (auto s = weak.lock()) s->send(std::move(m));
                          },
                          [weak = std::weak_ptr(self)] {
                            if (auto s = weak.lock()) s->request_close();
                          }});
        self->channel_->open();
      } catch (const std::exception& e) {
        self->send(error_message(e.what()));
        self->request_close();
        return;
      }
      asio::post(self->ws_.get_executor(), [self] {
        self->read();
        self->schedule_tick();
      });
    });
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      disconnected();
      return;
    }
    const bool binary = ws_.got_binary();
    auto data = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    asio::post(inbound_, [self = shared_from_this(), binary, data = std::move(data)] {
      if (!self->channel_ || self->channel_->closed()) return;
      if (binary) {
        self->channel_->on_binary(std::as_bytes(std::span(data.data(), data.size())));
      } else {
        self->channel_->on_text(data);
      }
    });
    read();
  }

  void disconnected() {
    timer_.cancel();
    asio::post(inbound_, [self = shared_from_this()] {
      if (self->channel_ && !self->channel_->closed()) self->channel_->handle(client::EndSession{});
      self->channel_.reset();
    });
  }

  // Paces playback at one chunk per chunk duration, and checks the
  // session clock.
  void schedule_tick() {
    timer_.expires_after(std::chrono::milliseconds(orch::kPlaybackChunkMs));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closing_) return;
      asio::post(self->inbound_, [self] {
        if (!self->channel_ || self->channel_->closed()) return;
        self->channel_->pump_playback();
        if (++self->ticks_ % 10 == 0) self->channel_->tick();
      });
      self->schedule_tick();
    });
  }

  // Any thread.
  void send(ServerMessage m) {
    std::vector<Outgoing> items;
    items.push_back({false, m.text()});
    if (m.audio) {
      const auto bytes = m.binary();
      items.push_back({true, std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size())});
    }
    asio::post(ws_.get_executor(), [self = shared_from_this(), items = std::move(items)]() mutable {
      for (auto& i : items) self->queue_.push_back(std::move(i));
      if (!self->writing_) self->write_next();
    });
  }

  void request_close() {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      self->timer_.cancel();
      if (!self->writing_) self->write_next();
    });
  }

  void write_next() {
    if (queue_.empty()) {
      writing_ = false;
      if (closing_ && !close_sent_) {
        close_sent_ = true;
        ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
      }
      return;
    }
    writing_ = true;
    ws_.binary(queue_.front().binary);
    ws_.async_write(asio::buffer(queue_.front().data),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->queue_.pop_front();
                      if (ec) {
                        self->queue_.clear();
                        self->writing_ = false;
                        return;
                      }
                      self->write_next();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  SessionManager& manager_;
  asio::strand<Pool::executor_type> inbound_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::string session_id_;
  std::unique_ptr<SessionChannel> channel_;
  std::uint64_t ticks_ = 0;

  // Owned by the socket's strand.
  std::deque<Outgoing> queue_;
  bool writing_ = false;
  bool closing_ = false;
  bool close_sent_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, SessionManager& manager, Pool& pool)
      : stream_(std::move(socket)), manager_(manager), pool_(pool) {}

  void start() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      if (path_of(view(req_.target())) != "/ws/session") {
        respond({404, {{"error", "NotFound"}, {"message", std::string(view(req_.target()))}}});
        return;
      }
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), manager_, pool_)->start(std::move(req_));
      return;
    }
    // REST handlers may load models; keep them off the socket thread.
    asio::post(pool_, [self = shared_from_this()] {
      auto result = handle_rest(self->manager_, std::string(view(self->req_.method_string())),
                                std::string(view(self->req_.target())), self->req_.body());
      asio::post(self->stream_.get_executor(), [self, result = std::move(result)] { self->respond(result); });
    });
  }

  void respond(const HttpResult& result) {
    auto res = std::make_shared<http::response<http::string_body>>(
        static_cast<http::status>(result.status), req_.version());
    res->set(http::field::server, "sds-gateway");
    res->set(http::field::content_type, "application/json");
    res->keep_alive(req_.keep_alive());
    res->body() = result.body.dump();
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (res->keep_alive()) {
        self->read();
      } else {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      }
    });
  }

  beast::tcp_stream stream_;
  SessionManager& manager_;
  Pool& pool_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct GatewayServer::Impl {
  Impl(SessionManager& manager, const ServerOptions& opts)
      : manager(manager),
        pool(static_cast<std::size_t>(std::max(1, opts.worker_threads))),
        acceptor(asio::make_strand(io)) {
    const tcp::endpoint ep(asio::ip::make_address(opts.bind_address), opts.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen(asio::socket_base::max_listen_connections);
    bound_port = acceptor.local_endpoint().port();
    accept();
    for (int i = 0; i < std::max(1, opts.io_threads); ++i) threads.emplace_back([this] { io.run(); });
  }

  void accept() {
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(socket), manager, pool)->start();
      accept();
    });
  }

  void stop() {
    if (stopped) return;
    stopped = true;
    asio::post(acceptor.get_executor(), [this] {
      beast::error_code ignored;
      acceptor.close(ignored);
    });
    io.stop();
    for (auto& t : threads) t.join();
    threads.clear();
    pool.join();
  }

  SessionManager& manager;
  // The pool outlives the io_context: pending socket handlers hold strands
  // on it.
  Pool pool;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::uint16_t bound_port = 0;
  std::vector<std::thread> threads;
  bool stopped = false;
};

GatewayServer::GatewayServer(SessionManager& manager, ServerOptions options)
    : impl_(std::make_unique<Impl>(manager, options)) {}

GatewayServer::~GatewayServer() { stop(); }

std::uint16_t GatewayServer::port() const noexcept { return impl_->bound_port; }

void GatewayServer::stop() { impl_->stop(); }

}  // namespace sds::gateway
