// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/gateway/channel.hpp"

#include "sds/error.hpp"

namespace sds::gateway {

namespace st = server_type;

SessionChannel::SessionChannel(SessionManager& manager, std::string session_id, ChannelOutput output)
    : manager_(manager),
      session_id_(std::move(session_id)),
      entry_(manager_.find(session_id_)),
      output_(std::move(output)) {
  manager_.set_listener(session_id_, [this](const orch::SessionEvent& ev) { on_event(ev); });
}

SessionChannel::~SessionChannel() {
  std::lock_guard lock(entry_->mu);
  entry_->listener = nullptr;
}

void SessionChannel::open() {
  std::lock_guard lock(mu_);
  const auto state = entry_->session->state();
  if (state == orch::State::Expired) {
    send_locked({{{"type", st::kSessionExpired}}, std::nullopt});
    return;
  }
  loading_ = state == orch::State::Loading;
  send_locked(status_message(loading_ ? orch::event::StatusKind::Loading : orch::event::StatusKind::Ready));
  if (manager_.options().storage.enabled && manager_.options().storage.privacy_notice_ack_required) {
    send_locked({{{"type", st::kPrivacyNotice}, {"text", kPrivacyNotice}}, std::nullopt});
  }
}

void SessionChannel::send_locked(ServerMessage m) {
  if (closed_ || !output_.send) return;
  output_.send(std::move(m));
}

bool SessionChannel::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

void SessionChannel::release_metrics_locked(int turn_id) {
  metrics_released_.insert(turn_id);
  const auto it = deferred_metrics_.find(turn_id);
  if (it == deferred_metrics_.end()) return;
  auto m = std::move(it->second);
  deferred_metrics_.erase(it);
  send_locked(std::move(m));
}

void SessionChannel::on_event(const orch::SessionEvent& event) {
  namespace ev = orch::event;
  std::lock_guard lock(mu_);
  if (const auto* s = std::get_if<ev::Status>(&event)) {
    loading_ = s->kind == ev::StatusKind::Loading;
  } else if (const auto* r = std::get_if<ev::TurnReady>(&event)) {
    if (!r->will_play) release_metrics_locked(r->turn_id);
    return;
  } else if (const auto* b = std::get_if<ev::BargeIn>(&event)) {
    // The interrupted turn may never send audio.
    release_metrics_locked(b->turn_id);
  } else if (const auto* f = std::get_if<ev::TurnFailed>(&event)) {
    metrics_released_.insert(f->turn_id);
  }

  auto msg = to_server_message(event);
  if (!msg) return;
  const bool output = std::holds_alternative<ev::AsrText>(event) ||
                      std::holds_alternative<ev::ResponseText>(event) ||
                      std::holds_alternative<ev::TurnMetrics>(event);
  if (output && loading_) return;

  if (const auto* m = std::get_if<ev::TurnMetrics>(&event)) {
    if (const auto turn = entry_->session->turn(m->turn_id)) msg->body["latency"] = turn->latency;
    if (!metrics_released_.count(m->turn_id)) {
      deferred_metrics_[m->turn_id] = std::move(*msg);
      return;
    }
  }
  send_locked(std::move(*msg));
  if (std::holds_alternative<ev::SessionExpired>(event)) {
    deferred_metrics_.clear();
  }
}

bool SessionChannel::pump_playback() {
  std::lock_guard lock(mu_);
  if (closed_) return false;
  const auto chunk = entry_->session->next_playback_chunk();
  if (!chunk) return false;
  if (loading_) return true;
  send_locked(audio_message(*chunk));
  release_metrics_locked(chunk->turn_id);
  return true;
}

void SessionChannel::on_text(std::string_view text) {
  try {
    handle(parse_client_text(text));
  } catch (const Error& e) {
    std::lock_guard lock(mu_);
    send_locked(error_message(e.what()));
  }
}

void SessionChannel::on_binary(std::span<const std::byte> bytes) {
  try {
    handle(parse_client_binary(bytes));
  } catch (const Error& e) {
    std::lock_guard lock(mu_);
    send_locked(error_message(e.what()));
  }
}

void SessionChannel::handle(const ClientMessage& message) {
  auto& session = *entry_->session;
  if (const auto* a = std::get_if<client::AudioChunk>(&message)) {
    try {
      session.ingest_pcm(a->samples);
    } catch (const Error& e) {
      if (e.code() != Errc::SessionExpired) throw;
      finish();
    }
  } else if (const auto* c = std::get_if<client::SelectConfig>(&message)) {
    try {
      session.switch_config(c->config);
    } catch (const Error& e) {
      if (e.code() == Errc::SessionExpired) {
        finish();
        return;
      }
      // The session already reported the failure as an error status.
    }
  } else if (const auto* f = std::get_if<client::Feedback>(&message)) {
    const auto r = manager_.record_feedback(session_id_, f->turn_id, f->dimension, f->level);
    std::lock_guard lock(mu_);
    auto body = to_json(r, manager_.options().scales);
    body["type"] = st::kFeedbackAck;
    send_locked({std::move(body), std::nullopt});
  } else if (std::holds_alternative<client::EndSession>(message)) {
    finish();
  } else if (std::holds_alternative<client::PrivacyAck>(message)) {
    manager_.acknowledge_privacy(session_id_);
  }
}

void SessionChannel::tick() {
  if (entry_->session->check_expiry()) finish();
}

void SessionChannel::finish() {
  {
    std::lock_guard lock(mu_);
    if (finished_) return;
    finished_ = true;
  }
  entry_->session->wait_idle();
  std::string failure;
  if (manager_.storage_active(session_id_)) {
    try {
      manager_.persist(session_id_);
    } catch (const std::exception& e) {
      failure = e.what();
    }
  }
  entry_->session->close();
  std::lock_guard lock(mu_);
  if (!failure.empty()) send_locked(error_message("could not store session: " + failure));
  // Metrics still held back belong to turns whose audio never went out.
  deferred_metrics_.clear();
  closed_ = true;
  if (output_.close) output_.close();
}

}  // namespace sds::gateway
