// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/vad.hpp"

#include <algorithm>
#include <string>

#include "sds/error.hpp"

namespace sds::vad {

void VadConfig::validate() const {
  if (!audio::is_supported_frame_ms(frame_ms)) {
    throw Error(Errc::InvalidArgument, "vad frame_ms must be 10, 20 or 30");
  }
  if (onset_frames < 1) throw Error(Errc::InvalidArgument, "onset_frames must be >= 1");
  if (hangover_frames < 1) throw Error(Errc::InvalidArgument, "hangover_frames must be >= 1");
  if (!(activation_ratio > 1.0)) throw Error(Errc::InvalidArgument, "activation_ratio must be > 1");
}

Classification classify_frame(const audio::AudioFrame& frame, const VadConfig& cfg,
                              double noise_floor_rms) {
  const auto expected = audio::samples_per_frame(frame.format, cfg.frame_ms);
  if (frame.samples.size() != expected) {
    throw Error(Errc::InvalidArgument, "frame has " + std::to_string(frame.samples.size()) +
                                           " samples, expected " + std::to_string(expected));
  }
  Classification out;
  out.frame_rms = audio::rms(frame.samples);
  const double threshold =
      std::max(audio::dbfs_to_linear(cfg.energy_floor_dbfs), cfg.activation_ratio * noise_floor_rms);
  if (out.frame_rms > threshold) {
    out.decision = Decision::Speech;
    out.noise_floor_rms = noise_floor_rms;
  } else {
    out.decision = Decision::Nonspeech;
    out.noise_floor_rms =
        kNoiseTrackerKeep * noise_floor_rms + (1.0 - kNoiseTrackerKeep) * out.frame_rms;
  }
  return out;
}

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Idle: return "Idle";
    case Phase::MaybeSpeech: return "MaybeSpeech";
    case Phase::InSpeech: return "InSpeech";
    case Phase::MaybeEnd: return "MaybeEnd";
  }
  return "?";
}

namespace {

void append(std::vector<std::int16_t>& dst, const std::vector<std::int16_t>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void enter_speech(EndpointerState& s, std::vector<EndpointEvent>& events) {
  s.phase = Phase::InSpeech;
  s.consecutive_count = 0;
  s.segment_start_s = s.run_start_s;
  s.segment_samples = std::move(s.run_samples);
  s.run_samples.clear();
  events.emplace_back(SpeechStart{s.run_start_s});
}

void end_speech(EndpointerState& s, std::vector<EndpointEvent>& events) {
  audio::SpeechSegment seg;
  seg.samples = std::move(s.segment_samples);
  seg.start_s = *s.segment_start_s;
  seg.end_s = s.run_start_s;
  seg.format = s.format;
  events.emplace_back(SpeechEnd{std::move(seg)});
  s.phase = Phase::Idle;
  s.consecutive_count = 0;
  s.segment_start_s.reset();
  s.segment_samples.clear();
  s.run_samples.clear();
}

}  // namespace

StepResult endpoint_step(EndpointerState state, Decision decision, const audio::AudioFrame& frame,
                         const VadConfig& cfg) {
  std::vector<EndpointEvent> events;
  auto& s = state;
  s.format = frame.format;
  const bool speech = decision == Decision::Speech;

  switch (s.phase) {
    case Phase::Idle:
      if (speech) {
        s.run_start_s = frame.start_time_s;
        s.run_samples = frame.samples;
        s.consecutive_count = 1;
        s.phase = Phase::MaybeSpeech;
        if (s.consecutive_count >= cfg.onset_frames) enter_speech(s, events);
      }
      break;

    case Phase::MaybeSpeech:
      if (speech) {
        append(s.run_samples, frame.samples);
        ++s.consecutive_count;
        if (s.consecutive_count >= cfg.onset_frames) enter_speech(s, events);
      } else {
        s.phase = Phase::Idle;
        s.consecutive_count = 0;
        s.run_samples.clear();
      }
      break;

    case Phase::InSpeech:
      if (speech) {
        append(s.segment_samples, frame.samples);
      } else {
        s.run_start_s = frame.start_time_s;
        s.run_samples = frame.samples;
        s.consecutive_count = 1;
        s.phase = Phase::MaybeEnd;
        if (s.consecutive_count >= cfg.hangover_frames) end_speech(s, events);
      }
      break;

    case Phase::MaybeEnd:
      if (speech) {
        append(s.segment_samples, s.run_samples);
        append(s.segment_samples, frame.samples);
        s.run_samples.clear();
        s.consecutive_count = 0;
        s.phase = Phase::InSpeech;
      } else {
        append(s.run_samples, frame.samples);
        ++s.consecutive_count;
        if (s.consecutive_count >= cfg.hangover_frames) end_speech(s, events);
      }
      break;
  }
  return {std::move(state), std::move(events)};
}

Endpointer::Endpointer(VadConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<EndpointEvent> Endpointer::push(const audio::AudioFrame& frame) {
  const auto cls = classify_frame(frame, cfg_, state_.noise_floor_rms);
  last_decision_ = cls.decision;
  auto result = endpoint_step(std::move(state_), cls.decision, frame, cfg_);
  state_ = std::move(result.state);
  state_.noise_floor_rms = cls.noise_floor_rms;
  return std::move(result.events);
}

}  // namespace sds::vad
