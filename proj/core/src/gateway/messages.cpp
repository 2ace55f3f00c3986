// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/gateway/messages.hpp"

#include "sds/error.hpp"

namespace sds::gateway {

namespace st = server_type;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void malformed(const std::string& why) { throw Error(Errc::MalformedMessage, why); }

}  // namespace

ClientMessage parse_client_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    malformed("client message is not JSON");
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) malformed("client message needs a type");
  const auto type = j["type"].get<std::string>();
  try {
    if (type == "select_config") {
      if (!j.contains("config")) malformed("select_config needs a config");
      return client::SelectConfig{j["config"].get<orch::PipelineConfig>()};
    }
    if (type == "feedback") {
      client::Feedback f;
      f.turn_id = j.at("turn_id").get<int>();
      f.dimension = dimension_from_string(j.at("dimension").get<std::string>());
      f.level = j.at("level").get<int>();
      return f;
    }
    if (type == "end_session") return client::EndSession{};
    if (type == "privacy_ack") return client::PrivacyAck{};
  } catch (const nlohmann::json::exception& e) {
    malformed(type + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedMessage) throw;
    malformed(type + ": " + e.what());
  }
  malformed("unknown client message type '" + type + "'");
}

ClientMessage parse_client_binary(std::span<const std::byte> bytes) {
  if (bytes.size() % 2 != 0) malformed("audio chunk has an odd byte count");
  return client::AudioChunk{audio::pcm_from_le_bytes(bytes)};
}

std::string render_client_message(const ClientMessage& m) {
  return std::visit(
      overloaded{
          [](const client::AudioChunk&) -> std::string { return {}; },
          [](const client::SelectConfig& c) {
            return nlohmann::json{{"type", "select_config"}, {"config", c.config}}.dump();
          },
          [](const client::Feedback& f) {
            return nlohmann::json{{"type", "feedback"},
                                  {"turn_id", f.turn_id},
                                  {"dimension", to_string(f.dimension)},
                                  {"level", f.level}}
                .dump();
          },
          [](const client::EndSession&) { return nlohmann::json{{"type", "end_session"}}.dump(); },
          [](const client::PrivacyAck&) { return nlohmann::json{{"type", "privacy_ack"}}.dump(); },
      },
      m);
}

std::vector<std::byte> ServerMessage::binary() const {
  if (!audio) return {};
  return audio::pcm_to_le_bytes(*audio);
}

ServerMessage status_message(orch::event::StatusKind kind, const std::string& detail) {
  ServerMessage m{{{"type", st::kStatus}, {"state", orch::to_string(kind)}}, std::nullopt};
  if (!detail.empty()) m.body["detail"] = detail;
  return m;
}

ServerMessage error_message(const std::string& detail, std::optional<int> turn_id) {
  auto m = status_message(orch::event::StatusKind::Error, detail);
  if (turn_id) m.body["turn_id"] = *turn_id;
  return m;
}

ServerMessage audio_message(const orch::PlaybackChunk& chunk) {
  return {{{"type", st::kResponseAudio},
           {"turn_id", chunk.turn_id},
           {"sample_rate_hz", chunk.format.sample_rate_hz},
           {"offset", chunk.offset},
           {"samples", chunk.samples.size()},
           {"last", chunk.last}},
          chunk.samples};
}

std::optional<ServerMessage> to_server_message(const orch::SessionEvent& event) {
  namespace ev = orch::event;
  using Out = std::optional<ServerMessage>;
  auto text = [](nlohmann::json body) -> Out { return ServerMessage{std::move(body), std::nullopt}; };
  return std::visit(
      overloaded{
          [&](const ev::VadState& e) {
            return text({{"type", st::kVadState}, {"state", e.speaking ? "speaking" : "idle"}, {"time_s", e.time_s}});
          },
          [&](const ev::BargeIn& e) {
            return text({{"type", st::kBargeIn}, {"turn_id", e.turn_id}, {"time_s", e.time_s}});
          },
          [&](const ev::TurnStarted&) -> Out { return std::nullopt; },
          [&](const ev::AsrText& e) { return text({{"type", st::kAsrText}, {"turn_id", e.turn_id}, {"text", e.text}}); },
          [&](const ev::ResponseText& e) {
            return text({{"type", st::kResponseText}, {"turn_id", e.turn_id}, {"text", e.text}});
          },
          [&](const ev::TurnReady&) -> Out { return std::nullopt; },
          [&](const ev::TurnFailed& e) -> Out { return error_message(e.error, e.turn_id); },
          [&](const ev::TurnMetrics& e) {
            return text({{"type", st::kTurnMetrics}, {"turn_id", e.turn_id}, {"metrics", e.values}});
          },
          [&](const ev::Status& e) -> Out { return status_message(e.kind, e.detail); },
          [&](const ev::SessionExpired& e) { return text({{"type", st::kSessionExpired}, {"time_s", e.time_s}}); },
      },
      event);
}

}  // namespace sds::gateway
