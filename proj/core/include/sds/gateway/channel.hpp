// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sds/gateway/messages.hpp"
#include "sds/gateway/session_manager.hpp"

namespace sds::gateway {

struct ChannelOutput {
  // Called in wire order, never concurrently.
  std::function<void(ServerMessage)> send;
  // The connection should close once queued messages are flushed.
  std::function<void()> close;
};

/// Client stream for one session, independent of the transport. Inbound
/// frames go to on_text/on_binary; outbound messages go to `send` in order.
/// Response audio leaves only through pump_playback(), one chunk per call,
/// so the caller paces it and a barge-in stops it within one chunk.
///
/// A turn's metrics are held back until its first audio chunk has been
/// sent (or it turns out the turn has no audio to send). Text output is
/// withheld while the session is loading a new configuration.
class SessionChannel {
 public:
  SessionChannel(SessionManager& manager, std::string session_id, ChannelOutput output);
  ~SessionChannel();
  SessionChannel(const SessionChannel&) = delete;
  SessionChannel& operator=(const SessionChannel&) = delete;

  /// Sends the current status and, when storage is on, the privacy notice.
  void open();
  void on_text(std::string_view text);
  void on_binary(std::span<const std::byte> bytes);
  void handle(const ClientMessage& message);

  /// Sends the next chunk of response audio. Returns true if one was sent.
  bool pump_playback();
  /// Expires the session if its time is up.
  void tick();

  bool closed() const;
  const std::string& session_id() const noexcept { return session_id_; }

 private:
  void on_event(const orch::SessionEvent& event);
  void send_locked(ServerMessage m);
  void release_metrics_locked(int turn_id);
  void finish();

  SessionManager& manager_;
  const std::string session_id_;
  std::shared_ptr<SessionManager::Entry> entry_;
  ChannelOutput output_;

  mutable std::mutex mu_;
  bool loading_ = false;
  bool closed_ = false;
  bool finished_ = false;
  // Turns whose metrics may go out as soon as they arrive.
  std::set<int> metrics_released_;
  std::map<int, ServerMessage> deferred_metrics_;
};

}  // namespace sds::gateway
