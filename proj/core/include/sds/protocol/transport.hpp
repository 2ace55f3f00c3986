// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "sds/protocol/frame.hpp"
#include "sds/protocol/message.hpp"

namespace sds::protocol {

/// Blocking byte stream. One reader and one writer may use it concurrently;
/// close() may be called from any thread and unblocks both.
class Transport {
 public:
  virtual ~Transport() = default;

  /// Throws Errc::ConnectionClosed once the peer or close() ended the stream.
  virtual void write_all(std::span<const std::byte> bytes) = 0;
  /// Returns 0 at end of stream.
  virtual std::size_t read_some(std::span<std::byte> buffer) = 0;
  virtual void close() noexcept = 0;
};

/// In-memory duplex pair; used for in-process workers.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_pipe();

std::unique_ptr<Transport> tcp_connect(const std::string& host, std::uint16_t port);

class TcpListener {
 public:
  /// Port 0 picks an ephemeral port.
  explicit TcpListener(std::uint16_t port, const std::string& bind_address = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Blocks for the next connection; nullptr once closed.
  std::unique_ptr<Transport> accept();
  void close() noexcept;

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> closed_{false};
};

/// Message-level reads and writes over a transport.
class MessageStream {
 public:
  explicit MessageStream(Transport& transport) : transport_(transport) {}

  /// Next complete message; nullopt at end of stream.
  std::optional<Message> read();
  void write(const Message& message);

 private:
  Transport& transport_;
  FrameReader frames_;
  MessageAssembler assembler_;
};

}  // namespace sds::protocol
