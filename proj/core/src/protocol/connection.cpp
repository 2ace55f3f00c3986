// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/protocol/connection.hpp"

#include <string>

#include "sds/error.hpp"

namespace sds::protocol {

WorkerConnection::WorkerConnection(std::unique_ptr<Transport> transport)
    : transport_(std::move(transport)) {}

WorkerConnection::~WorkerConnection() {
  close();
  if (reader_.joinable()) reader_.join();
}

std::future<Message> WorkerConnection::start(std::function<void()> on_closed) {
  auto hello = hello_.get_future();
  reader_ = std::thread([this, cb = std::move(on_closed)]() mutable { read_loop(std::move(cb)); });
  return hello;
}

void WorkerConnection::post(const Message& message) {
  const auto bytes = encode_message(message);
  std::lock_guard lock(write_mu_);
  transport_->write_all(bytes);
}

std::future<Reply> WorkerConnection::send(nlohmann::json header,
                                          std::optional<audio::AudioBuffer> audio,
                                          std::uint64_t* request_id) {
  if (closed_) throw Error(Errc::ConnectionClosed, "worker connection closed");
  const auto id = next_id_.fetch_add(1);
  header["request_id"] = id;
  Message msg{std::move(header), std::move(audio)};
  const auto bytes = encode_message(msg);

  std::future<Reply> fut;
  {
    std::lock_guard lock(pending_mu_);
    auto& p = pending_[id];
    p.sent_at = std::chrono::steady_clock::now();
    fut = p.promise.get_future();
  }
  if (request_id) *request_id = id;
  try {
    std::lock_guard lock(write_mu_);
    transport_->write_all(bytes);
  } catch (...) {
    abandon(id);
    throw;
  }
  return fut;
}

Reply WorkerConnection::call(nlohmann::json header, std::optional<audio::AudioBuffer> audio,
                             std::chrono::milliseconds deadline) {
  std::lock_guard serial(call_mu_);
  header["deadline_ms"] = deadline.count();
  std::uint64_t id = 0;
  auto fut = send(std::move(header), std::move(audio), &id);
  if (fut.wait_for(deadline) != std::future_status::ready) {
    abandon(id);
    throw Error(Errc::WorkerTimeout,
                "no response to request " + std::to_string(id) + " within " +
                    std::to_string(deadline.count()) + " ms");
  }
  auto reply = fut.get();
  if (reply.message.op() == op::kError) {
    std::string text = reply.message.header.value("message", std::string("worker error"));
    throw Error(Errc::WorkerError, text);
  }
  return reply;
}

void WorkerConnection::abandon(std::uint64_t request_id) {
  std::lock_guard lock(pending_mu_);
  pending_.erase(request_id);
}

void WorkerConnection::close() noexcept {
  closed_ = true;
  if (transport_) transport_->close();
}

void WorkerConnection::read_loop(std::function<void()> on_closed) {
  MessageStream stream(*transport_);
  std::string failure = "worker closed the connection";
  try {
    while (auto msg = stream.read()) {
      const auto now = std::chrono::steady_clock::now();
      if (!hello_seen_) {
        hello_seen_ = true;
        hello_.set_value(std::move(*msg));
        continue;
      }
      // Streaming partial results are reserved in the protocol; only the
      // final reply completes a request.
      if (msg->header.value("partial", false)) {
        ++partials_;
        continue;
      }
      const auto id = msg->request_id();
      std::optional<Pending> pending;
      if (id) {
        std::lock_guard lock(pending_mu_);
        if (auto it = pending_.find(*id); it != pending_.end()) {
          pending = std::move(it->second);
          pending_.erase(it);
        }
      }
      if (!pending) {
        ++dropped_;
        continue;
      }
      const double ms =
          std::chrono::duration<double, std::milli>(now - pending->sent_at).count();
      pending->promise.set_value(Reply{std::move(*msg), ms});
    }
  } catch (const std::exception& e) {
    failure = e.what();
  }

  closed_ = true;
  transport_->close();
  if (!hello_seen_) {
    hello_seen_ = true;
    hello_.set_exception(std::make_exception_ptr(Error(Errc::ConnectionClosed, failure)));
  }
  std::map<std::uint64_t, Pending> orphans;
  {
    std::lock_guard lock(pending_mu_);
    orphans.swap(pending_);
  }
  for (auto& [id, p] : orphans) {
    p.promise.set_exception(std::make_exception_ptr(Error(Errc::ConnectionClosed, failure)));
  }
  if (on_closed) on_closed();
}

}  // namespace sds::protocol
