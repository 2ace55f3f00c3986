// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/protocol/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "sds/error.hpp"

namespace sds::protocol {
namespace {

struct PipeDirection {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::byte> bytes;
  bool closed = false;
};

struct PipeShared {
  PipeDirection a_to_b;
  PipeDirection b_to_a;

  void close_all() {
    for (auto* d : {&a_to_b, &b_to_a}) {
      {
        std::lock_guard lock(d->mu);
        d->closed = true;
      }
      d->cv.notify_all();
    }
  }
};

class PipeEnd final : public Transport {
 public:
  PipeEnd(std::shared_ptr<PipeShared> shared, bool is_a) : shared_(std::move(shared)), is_a_(is_a) {}
  ~PipeEnd() override { close(); }

  void write_all(std::span<const std::byte> bytes) override {
    auto& d = is_a_ ? shared_->a_to_b : shared_->b_to_a;
    {
      std::lock_guard lock(d.mu);
      if (d.closed) throw Error(Errc::ConnectionClosed, "pipe closed");
      d.bytes.insert(d.bytes.end(), bytes.begin(), bytes.end());
    }
    d.cv.notify_all();
  }

  std::size_t read_some(std::span<std::byte> buffer) override {
    auto& d = is_a_ ? shared_->b_to_a : shared_->a_to_b;
    std::unique_lock lock(d.mu);
    d.cv.wait(lock, [&] { return !d.bytes.empty() || d.closed; });
    if (d.bytes.empty()) return 0;
    const std::size_t n = std::min(buffer.size(), d.bytes.size());
    std::copy_n(d.bytes.begin(), n, buffer.begin());
    d.bytes.erase(d.bytes.begin(), d.bytes.begin() + static_cast<std::ptrdiff_t>(n));
    return n;
  }

  void close() noexcept override { shared_->close_all(); }

 private:
  std::shared_ptr<PipeShared> shared_;
  bool is_a_;
};

class TcpTransport final : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpTransport() override {
    close();
    ::close(fd_);
  }

  void write_all(std::span<const std::byte> bytes) override {
    while (!bytes.empty()) {
      const auto n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(Errc::ConnectionClosed, std::string("send: ") + std::strerror(errno));
      }
      bytes = bytes.subspan(static_cast<std::size_t>(n));
    }
  }

  std::size_t read_some(std::span<std::byte> buffer) override {
    for (;;) {
      const auto n = ::recv(fd_, buffer.data(), buffer.size(), 0);
      if (n >= 0) return static_cast<std::size_t>(n);
      if (errno == EINTR) continue;
      return 0;
    }
  }

  // shutdown() unblocks a concurrent recv without releasing the descriptor.
  void close() noexcept override {
    if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  int fd_;
  std::atomic<bool> closed_{false};
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_pipe() {
  auto shared = std::make_shared<PipeShared>();
  return {std::make_unique<PipeEnd>(shared, true), std::make_unique<PipeEnd>(shared, false)};
}

std::unique_ptr<Transport> tcp_connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const auto service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error(Errc::ConnectionClosed, "resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(Errc::ConnectionClosed, "connect " + host + ":" + service + " failed");
  return std::make_unique<TcpTransport>(fd);
}

TcpListener::TcpListener(std::uint16_t port, const std::string& bind_address) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error(Errc::IoFailure, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw Error(Errc::InvalidArgument, "bad bind address " + bind_address);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    throw Error(Errc::IoFailure, "listen on port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  close();
  ::close(fd_);
}

std::unique_ptr<Transport> TcpListener::accept() {
  while (!closed_) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      if (closed_) {
        ::close(fd);
        return nullptr;
      }
      return std::make_unique<TcpTransport>(fd);
    }
    if (errno != EINTR && errno != ECONNABORTED) return nullptr;
  }
  return nullptr;
}

void TcpListener::close() noexcept {
  if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
}

std::optional<Message> MessageStream::read() {
  std::array<std::byte, 64 * 1024> buffer{};
  for (;;) {
    while (auto frame = frames_.next()) {
      if (auto msg = assembler_.push(std::move(*frame))) return msg;
    }
    const auto n = transport_.read_some(buffer);
    if (n == 0) return std::nullopt;
    frames_.feed(std::span(buffer.data(), n));
  }
}

void MessageStream::write(const Message& message) { transport_.write_all(encode_message(message)); }

}  // namespace sds::protocol
