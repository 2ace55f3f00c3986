// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sds::metrics {

enum class Channel { A, B };

std::string_view to_string(Channel c) noexcept;

struct SpeechInterval {
  Channel channel = Channel::A;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct EventStats {
  std::size_t count = 0;
  double duration_s = 0.0;
  double events_per_minute = 0.0;
  double cumulated_duration_pct = 0.0;
};

enum class EventKind { Ipu, Pause, Gap, Overlap };

inline constexpr EventKind kEventKinds[] = {EventKind::Ipu, EventKind::Pause, EventKind::Gap,
                                            EventKind::Overlap};

std::string_view to_string(EventKind k) noexcept;

struct TurnTakingReport {
  double total_duration_s = 0.0;
  EventStats ipu, pause, gap, overlap;

  // Shares of the window, in percent. union + pause + gap + edge = 100 and
  // solo + overlap = union.
  double union_speech_pct = 0.0;
  double solo_speech_pct = 0.0;
  double edge_silence_pct = 0.0;

  // Filled when transcripts are available.
  std::optional<double> speaking_rate_wpm;
  std::optional<double> backchannel_rate_per_min;

  const EventStats& stats(EventKind k) const noexcept;
  EventStats& stats(EventKind k) noexcept;
};

inline constexpr double kDefaultMergeGapS = 0.2;

/// Interpausal units per channel (intervals closer than merge_gap_s are
/// joined), overlaps where both channels speak, and interior silences
/// classed as pauses (same channel on both sides) or gaps (speaker change).
/// Silences touching either end of the window are excluded.
///
/// Throws Errc::ZeroDuration, Errc::NegativeDuration (end <= start) or
/// Errc::IntervalOutOfRange (outside [0, total]).
TurnTakingReport analyze_turn_taking(std::span<const SpeechInterval> intervals,
                                     double total_duration_s,
                                     double merge_gap_s = kDefaultMergeGapS);

/// Merged intervals of one channel, sorted.
std::vector<SpeechInterval> merge_channel(std::span<const SpeechInterval> intervals, Channel channel,
                                          double merge_gap_s = kDefaultMergeGapS);

}  // namespace sds::metrics
