// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/protocol/message.hpp"

#include <string>

#include "sds/error.hpp"

namespace sds::protocol {

std::string_view to_string(Task task) noexcept {
  switch (task) {
    case Task::Asr: return "asr";
    case Task::Llm: return "llm";
    case Task::Tts: return "tts";
    case Task::E2e: return "e2e";
    case Task::Judge: return "judge";
  }
  return "?";
}

Task task_from_string(std::string_view name) {
  if (name == "asr") return Task::Asr;
  if (name == "llm") return Task::Llm;
  if (name == "tts") return Task::Tts;
  if (name == "e2e") return Task::E2e;
  if (name == "judge") return Task::Judge;
  throw Error(Errc::InvalidArgument, "unknown task '" + std::string(name) + "'");
}

std::string Message::op() const {
  const auto it = header.find("op");
  if (it == header.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

std::optional<std::uint64_t> Message::request_id() const {
  const auto it = header.find("request_id");
  if (it == header.end() || !it->is_number_unsigned()) return std::nullopt;
  return it->get<std::uint64_t>();
}

std::vector<std::byte> encode_message(const Message& message) {
  nlohmann::json header = message.header;
  if (message.audio) {
    header["audio"] = {{"sample_rate_hz", message.audio->format.sample_rate_hz},
                       {"samples", message.audio->samples.size()}};
  } else {
    header.erase("audio");
  }
  const std::string text = header.dump();
  auto out = encode_frame(FrameKind::Header, std::as_bytes(std::span(text)));
  if (message.audio) {
    const auto pcm = audio::pcm_to_le_bytes(message.audio->samples);
    const auto audio_frame = encode_frame(FrameKind::Audio, pcm);
    out.insert(out.end(), audio_frame.begin(), audio_frame.end());
  }
  return out;
}

std::optional<Message> MessageAssembler::push(Frame frame) {
  if (frame.kind == FrameKind::Audio) {
    if (!pending_) throw Error(Errc::MalformedMessage, "audio frame without a preceding header");
    if (frame.payload.size() != expected_samples_ * 2) {
      throw Error(Errc::MalformedMessage, "audio frame has " + std::to_string(frame.payload.size()) +
                                              " bytes, header declared " +
                                              std::to_string(expected_samples_) + " samples");
    }
    pending_->audio->samples = audio::pcm_from_le_bytes(frame.payload);
    auto done = std::move(*pending_);
    pending_.reset();
    return done;
  }

  if (pending_) throw Error(Errc::MalformedMessage, "header arrived while audio was expected");
  Message msg;
  try {
    const auto* begin = reinterpret_cast<const char*>(frame.payload.data());
    msg.header = nlohmann::json::parse(begin, begin + frame.payload.size());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedMessage, std::string("header is not JSON: ") + e.what());
  }
  if (!msg.header.is_object()) throw Error(Errc::MalformedMessage, "header is not an object");

  const auto it = msg.header.find("audio");
  if (it == msg.header.end() || it->is_null()) return msg;
  try {
    audio::AudioBuffer buffer;
    buffer.format.sample_rate_hz = it->at("sample_rate_hz").get<int>();
    expected_samples_ = it->at("samples").get<std::size_t>();
    msg.audio = std::move(buffer);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedMessage, std::string("bad audio descriptor: ") + e.what());
  }
  pending_ = std::move(msg);
  return std::nullopt;
}

}  // namespace sds::protocol
