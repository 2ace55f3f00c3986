// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sds/gateway/feedback.hpp"
#include "sds/orchestrator/pipeline.hpp"
#include "sds/orchestrator/session.hpp"

namespace sds::gateway {

// Client -> server. Binary frames are audio chunks; text frames are JSON
// objects with a "type" field.
namespace client {
struct AudioChunk {
  std::vector<std::int16_t> samples;
};
struct SelectConfig {
  orch::PipelineConfig config;
};
struct Feedback {
  int turn_id = 0;
  Dimension dimension = Dimension::Naturalness;
  int level = 0;
};
struct EndSession {};
/// The client has shown the privacy notice and the user accepted it.
struct PrivacyAck {};
}  // namespace client

using ClientMessage = std::variant<client::AudioChunk, client::SelectConfig, client::Feedback,
                                   client::EndSession, client::PrivacyAck>;

/// Throws Errc::MalformedMessage.
ClientMessage parse_client_text(std::string_view text);
/// Little-endian 16-bit PCM. Throws Errc::MalformedMessage on an odd length.
ClientMessage parse_client_binary(std::span<const std::byte> bytes);

std::string render_client_message(const ClientMessage& m);

namespace server_type {
inline constexpr std::string_view kVadState = "vad_state";
inline constexpr std::string_view kAsrText = "asr_text";
inline constexpr std::string_view kResponseText = "response_text";
inline constexpr std::string_view kResponseAudio = "response_audio";
inline constexpr std::string_view kTurnMetrics = "turn_metrics";
inline constexpr std::string_view kStatus = "status";
inline constexpr std::string_view kSessionExpired = "session_expired";
inline constexpr std::string_view kBargeIn = "barge_in";
inline constexpr std::string_view kFeedbackAck = "feedback_ack";
inline constexpr std::string_view kPrivacyNotice = "privacy_notice";
}  // namespace server_type

/// Server -> client. `body` always carries "type". A response_audio message
/// is sent as its JSON header followed by one binary frame of PCM.
struct ServerMessage {
  nlohmann::json body;
  std::optional<std::vector<std::int16_t>> audio;

  std::string type() const { return body.value("type", std::string()); }
  std::string text() const { return body.dump(); }
  std::vector<std::byte> binary() const;
};

ServerMessage status_message(orch::event::StatusKind kind, const std::string& detail = {});
ServerMessage error_message(const std::string& detail, std::optional<int> turn_id = {});
ServerMessage audio_message(const orch::PlaybackChunk& chunk);

/// Client-facing form of a session event; nullopt for internal events.
std::optional<ServerMessage> to_server_message(const orch::SessionEvent& event);

}  // namespace sds::gateway
