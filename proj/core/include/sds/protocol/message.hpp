// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sds/audio.hpp"
#include "sds/protocol/frame.hpp"

namespace sds::protocol {

enum class Task { Asr, Llm, Tts, E2e, Judge };

std::string_view to_string(Task task) noexcept;
/// Throws Errc::InvalidArgument for unknown names.
Task task_from_string(std::string_view name);

// Header ops.
namespace op {
inline constexpr std::string_view kHello = "hello";
inline constexpr std::string_view kHelloAck = "hello_ack";
inline constexpr std::string_view kLoad = "load";
inline constexpr std::string_view kUnload = "unload";
inline constexpr std::string_view kInfer = "infer";
inline constexpr std::string_view kPing = "ping";
inline constexpr std::string_view kPong = "pong";
inline constexpr std::string_view kOk = "ok";
inline constexpr std::string_view kResult = "result";
inline constexpr std::string_view kError = "error";
}  // namespace op

/// One logical message: a JSON header optionally followed by one audio frame.
/// When audio is present the header carries
/// "audio": {"sample_rate_hz": R, "samples": N}.
struct Message {
  nlohmann::json header = nlohmann::json::object();
  std::optional<audio::AudioBuffer> audio;

  std::string op() const;
  std::optional<std::uint64_t> request_id() const;
};

std::vector<std::byte> encode_message(const Message& message);

/// Reassembles messages from decoded frames.
class MessageAssembler {
 public:
  /// Returns the completed message, if this frame completes one. Throws
  /// Errc::MalformedMessage on protocol violations.
  std::optional<Message> push(Frame frame);

 private:
  std::optional<Message> pending_;
  std::size_t expected_samples_ = 0;
};

}  // namespace sds::protocol
