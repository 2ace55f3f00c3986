// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "sds/protocol/message.hpp"
#include "sds/protocol/transport.hpp"

namespace sds::protocol {

struct Reply {
  Message message;
  // First request byte written to last response byte read.
  double latency_ms = 0.0;
};

/// Harness side of one worker connection. A reader thread re-associates
/// responses with pending requests by request_id, so responses may arrive in
/// any order; responses to abandoned (timed-out) requests are dropped.
class WorkerConnection {
 public:
  explicit WorkerConnection(std::unique_ptr<Transport> transport);
  ~WorkerConnection();
  WorkerConnection(const WorkerConnection&) = delete;
  WorkerConnection& operator=(const WorkerConnection&) = delete;

  /// Starts the reader. The first message received fulfils the returned
  /// future (the worker's hello). `on_closed` runs on the reader thread when
  /// the stream ends.
  std::future<Message> start(std::function<void()> on_closed);

  /// Writes a message without a request id (e.g. hello_ack).
  void post(const Message& message);

  /// Assigns the next request_id and sends. Does not wait.
  std::future<Reply> send(nlohmann::json header, std::optional<audio::AudioBuffer> audio,
                          std::uint64_t* request_id = nullptr);

  /// Serialized request/response with a deadline. Throws Errc::WorkerTimeout,
  /// Errc::WorkerError (worker-reported failure, message verbatim) or
  /// Errc::ConnectionClosed.
  Reply call(nlohmann::json header, std::optional<audio::AudioBuffer> audio,
             std::chrono::milliseconds deadline);

  void close() noexcept;
  bool closed() const noexcept { return closed_; }
  std::uint64_t dropped_responses() const noexcept { return dropped_; }
  /// Replies flagged `partial: true`; these never complete a request.
  std::uint64_t partial_responses() const noexcept { return partials_; }

 private:
  struct Pending {
    std::promise<Reply> promise;
    std::chrono::steady_clock::time_point sent_at;
  };

  void read_loop(std::function<void()> on_closed);
  void abandon(std::uint64_t request_id);

  std::unique_ptr<Transport> transport_;
  std::thread reader_;
  std::mutex write_mu_;
  std::mutex call_mu_;
  std::mutex pending_mu_;
  std::map<std::uint64_t, Pending> pending_;
  std::promise<Message> hello_;
  bool hello_seen_ = false;
  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<bool> closed_{false};
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> partials_{0};
};

}  // namespace sds::protocol
