// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sds/audio.hpp"
#include "sds/metrics/metric_value.hpp"

namespace sds::protocol {
class WorkerRegistry;
}

namespace sds::metrics {

inline constexpr std::string_view kWer = "wer";
inline constexpr std::string_view kCer = "cer";
inline constexpr std::string_view kTranscriptMetric = "transcript";

/// Speech-quality metrics scored on synthesized audio.
inline constexpr std::string_view kAudioQualityMetrics[] = {"utmos", "dns_overall", "dns_p808",
                                                            "plcmos", "ssqa"};
/// Response-text metrics scored by judges.
inline constexpr std::string_view kTextJudgeMetrics[] = {"perplexity", "dialogpt_perplexity",
                                                         "bert_similarity"};

bool is_audio_quality_metric(std::string_view name) noexcept;

/// A judge's transcript of some audio, or the reason it has none.
struct JudgeText {
  std::string judge_id;
  std::optional<std::string> text;
  std::string error;
};

/// One WER and one CER per judge with the judge text as reference. Judges
/// without text, or whose text normalizes to nothing, yield error entries.
std::vector<MetricValue> judge_referenced_asr(const std::string& hypothesis,
                                              std::span<const JudgeText> judges,
                                              std::optional<int> turn_id = {});

/// Transcribes `audio` with every judge serving the transcript metric.
/// Failures are captured per judge.
std::vector<JudgeText> collect_judge_transcripts(protocol::WorkerRegistry& registry,
                                                 const audio::AudioBuffer& audio,
                                                 std::optional<std::chrono::milliseconds> deadline = {});

struct JudgeInput {
  std::optional<int> turn_id;
  // ASR transcript of the user turn; absent for end-to-end systems.
  std::optional<std::string> user_text;
  std::optional<audio::AudioBuffer> user_audio;
  std::string context;
  std::string response_text;
  std::optional<audio::AudioBuffer> response_audio;
};

/// One dispatch per (metric, judge). Missing judges or inputs produce
/// skipped entries and worker failures produce error entries; nothing
/// throws. `wer` and `cer` score the user transcript against judge
/// transcripts of the user audio.
std::vector<MetricValue> request_judge_metrics(protocol::WorkerRegistry& registry,
                                               const JudgeInput& input,
                                               std::span<const std::string> wanted,
                                               std::optional<std::chrono::milliseconds> deadline = {});

}  // namespace sds::metrics
