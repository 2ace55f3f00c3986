// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sds/audio.hpp"
#include "sds/vad.hpp"

namespace sds::orch {

enum class Mode { Cascaded, E2e };

std::string_view to_string(Mode m) noexcept;

struct PipelineConfig {
  Mode mode = Mode::Cascaded;
  std::optional<std::string> asr_model;
  std::optional<std::string> llm_model;
  std::optional<std::string> tts_model;
  std::optional<std::string> e2e_model;
  vad::VadConfig vad;

  /// Cascaded needs exactly the three stage models, e2e exactly e2e_model.
  /// Throws Errc::InvalidArgument.
  void validate() const;

  static PipelineConfig cascaded(std::string asr, std::string llm, std::string tts);
  static PipelineConfig e2e(std::string model);

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
/// Throws Errc::InvalidArgument on a malformed or inconsistent config.
void from_json(const nlohmann::json& j, PipelineConfig& c);

struct LatencyBreakdown {
  std::optional<double> asr_ms;
  std::optional<double> llm_ms;
  std::optional<double> tts_ms;
  std::optional<double> e2e_ms;
  // From SpeechEnd processing until response audio is ready.
  double total_ms = 0.0;
};

void to_json(nlohmann::json& j, const LatencyBreakdown& l);

struct TurnRecord {
  int turn_id = 0;
  Mode mode = Mode::Cascaded;
  audio::SpeechSegment user_segment;
  // Absent for end-to-end turns.
  std::optional<std::string> asr_text;
  std::string response_text;
  audio::AudioBuffer response_audio;
  LatencyBreakdown latency;
  bool interrupted = false;
  bool failed = false;
  std::string error;
  // Response samples handed to playback.
  std::size_t played_samples = 0;
  // LLM context sent for this turn (cascaded only).
  std::string context;
};

/// Summary without audio, as sent to clients and logs.
nlohmann::json turn_summary(const TurnRecord& t);

/// Prior turns as alternating "User: ..." / "Assistant: ..." lines, ending
/// with "User: <current>". Failed turns are left out.
std::string build_llm_context(std::span<const TurnRecord> history, const std::string& current);

}  // namespace sds::orch
