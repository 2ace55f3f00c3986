// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "sds/audio.hpp"

namespace sds::vad {

struct VadConfig {
  int frame_ms = 20;
  double energy_floor_dbfs = -50.0;
  // Multiplier over the adaptive noise floor a frame must exceed.
  double activation_ratio = 3.0;
  int onset_frames = 3;
  // 25 frames at 20 ms = 500 ms of trailing silence ends an utterance.
  int hangover_frames = 25;

  void validate() const;
  friend bool operator==(const VadConfig&, const VadConfig&) = default;
};

enum class Decision { Nonspeech, Speech };

struct Classification {
  Decision decision = Decision::Nonspeech;
  double frame_rms = 0.0;
  double noise_floor_rms = 0.0;
};

/// Adaptive-energy classifier. A frame is speech iff its RMS exceeds both the
/// absolute energy floor and activation_ratio times the tracked noise floor.
/// The floor follows nonspeech frames with an exponential tracker
/// (0.95 old + 0.05 new) and is held during speech.
Classification classify_frame(const audio::AudioFrame& frame, const VadConfig& cfg,
                              double noise_floor_rms);

inline constexpr double kNoiseTrackerKeep = 0.95;
inline constexpr double kInitialNoiseFloorDbfs = -50.0;

enum class Phase { Idle, MaybeSpeech, InSpeech, MaybeEnd };

std::string_view to_string(Phase phase) noexcept;

struct EndpointerState {
  Phase phase = Phase::Idle;
  int consecutive_count = 0;
  double noise_floor_rms = audio::dbfs_to_linear(kInitialNoiseFloorDbfs);
  std::optional<double> segment_start_s;

  // Start of the current MaybeSpeech run, or of the first hangover frame in
  // MaybeEnd.
  double run_start_s = 0.0;
  // Samples of the open MaybeSpeech or MaybeEnd run.
  std::vector<std::int16_t> run_samples;
  // Samples committed to the open segment.
  std::vector<std::int16_t> segment_samples;
  audio::AudioFormat format;
};

struct SpeechStart {
  double time_s = 0.0;
};

struct SpeechEnd {
  audio::SpeechSegment segment;
};

using EndpointEvent = std::variant<SpeechStart, SpeechEnd>;

struct StepResult {
  EndpointerState state;
  std::vector<EndpointEvent> events;
};

/// Advances the onset/hangover state machine by one frame decision.
StepResult endpoint_step(EndpointerState state, Decision decision, const audio::AudioFrame& frame,
                         const VadConfig& cfg);

/// Classifier and state machine for one stream.
class Endpointer {
 public:
  explicit Endpointer(VadConfig cfg = {});

  std::vector<EndpointEvent> push(const audio::AudioFrame& frame);

  const EndpointerState& state() const noexcept { return state_; }
  const VadConfig& config() const noexcept { return cfg_; }
  Decision last_decision() const noexcept { return last_decision_; }

 private:
  VadConfig cfg_;
  EndpointerState state_;
  Decision last_decision_ = Decision::Nonspeech;
};

}  // namespace sds::vad
