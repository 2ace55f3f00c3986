// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/metrics/judge.hpp"

#include <algorithm>

#include "sds/error.hpp"
#include "sds/metrics/alignment.hpp"
#include "sds/protocol/registry.hpp"

namespace sds::metrics {

bool is_audio_quality_metric(std::string_view name) noexcept {
  return std::find(std::begin(kAudioQualityMetrics), std::end(kAudioQualityMetrics), name) !=
         std::end(kAudioQualityMetrics);
}

std::vector<MetricValue> judge_referenced_asr(const std::string& hypothesis,
                                              std::span<const JudgeText> judges,
                                              std::optional<int> turn_id) {
  std::vector<MetricValue> out;
  const auto hyp = normalize_text(hypothesis);
  for (const auto& j : judges) {
    const auto source = judge_source(j.judge_id);
    if (!j.text) {
      out.push_back(MetricValue::failed(std::string(kWer), source, j.error, turn_id));
      out.push_back(MetricValue::failed(std::string(kCer), source, j.error, turn_id));
      continue;
    }
    const auto ref = normalize_text(*j.text);
    if (ref.empty()) {
      out.push_back(MetricValue::failed(std::string(kWer), source, "empty judge transcript", turn_id));
      out.push_back(MetricValue::failed(std::string(kCer), source, "empty judge transcript", turn_id));
      continue;
    }
    out.push_back(MetricValue::judged(std::string(kWer), wer(ref, hyp), j.judge_id, turn_id));
    out.push_back(MetricValue::judged(std::string(kCer), cer(ref, hyp), j.judge_id, turn_id));
  }
  return out;
}

std::vector<JudgeText> collect_judge_transcripts(protocol::WorkerRegistry& registry,
                                                 const audio::AudioBuffer& audio,
                                                 std::optional<std::chrono::milliseconds> deadline) {
  std::vector<JudgeText> out;
  for (const auto& id : registry.judges_for(kTranscriptMetric)) {
    JudgeText jt{id, std::nullopt, {}};
    try {
      const auto reply =
          registry.dispatch_to(id, {{"metric", kTranscriptMetric}}, audio, deadline);
      if (reply.body.contains("text") && reply.body["text"].is_string()) {
        jt.text = reply.body["text"].get<std::string>();
      } else {
        jt.error = "judge reply carries no text";
      }
    } catch (const std::exception& e) {
      jt.error = e.what();
    }
    out.push_back(std::move(jt));
  }
  return out;
}

namespace {

std::vector<MetricValue> asr_metrics(protocol::WorkerRegistry& registry, const JudgeInput& in,
                                     bool want_wer, bool want_cer,
                                     std::optional<std::chrono::milliseconds> deadline) {
  std::vector<MetricValue> out;
  auto skip_all = [&](const std::string& why) {
    if (want_wer) out.push_back(MetricValue::skipped(std::string(kWer), why, in.turn_id));
    if (want_cer) out.push_back(MetricValue::skipped(std::string(kCer), why, in.turn_id));
    return out;
  };
  if (!in.user_text) return skip_all("no ASR transcript");
  if (!in.user_audio) return skip_all("no user audio");
  const auto texts = collect_judge_transcripts(registry, *in.user_audio, deadline);
  if (texts.empty()) return skip_all("no transcript judge registered");
  for (auto& m : judge_referenced_asr(*in.user_text, texts, in.turn_id)) {
    if ((m.name == kWer && want_wer) || (m.name == kCer && want_cer)) out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

std::vector<MetricValue> request_judge_metrics(protocol::WorkerRegistry& registry,
                                               const JudgeInput& input,
                                               std::span<const std::string> wanted,
                                               std::optional<std::chrono::milliseconds> deadline) {
  std::vector<MetricValue> out;
  const bool want_wer = std::find(wanted.begin(), wanted.end(), kWer) != wanted.end();
  const bool want_cer = std::find(wanted.begin(), wanted.end(), kCer) != wanted.end();
  if (want_wer || want_cer) {
    for (auto& m : asr_metrics(registry, input, want_wer, want_cer, deadline)) out.push_back(std::move(m));
  }

  for (const auto& metric : wanted) {
    if (metric == kWer || metric == kCer) continue;
    const bool audio_metric = is_audio_quality_metric(metric);
    if (audio_metric && !input.response_audio) {
      out.push_back(MetricValue::skipped(metric, "no response audio", input.turn_id));
      continue;
    }
    const auto judges = registry.judges_for(metric);
    if (judges.empty()) {
      out.push_back(MetricValue::skipped(metric, "no judge serves " + metric, input.turn_id));
      continue;
    }
    nlohmann::json body{{"metric", metric}, {"context", input.context}, {"response", input.response_text}};
    if (input.user_text) body["user_text"] = *input.user_text;
    const std::optional<audio::AudioBuffer> payload =
        audio_metric ? input.response_audio : std::optional<audio::AudioBuffer>{};
    for (const auto& id : judges) {
      try {
        const auto reply = registry.dispatch_to(id, body, payload, deadline);
        const auto it = reply.body.find("value");
        if (it == reply.body.end() || !it->is_number()) {
          out.push_back(MetricValue::failed(metric, judge_source(id), "judge reply carries no value",
                                            input.turn_id));
        } else {
          out.push_back(MetricValue::judged(metric, it->get<double>(), id, input.turn_id));
        }
      } catch (const std::exception& e) {
        out.push_back(MetricValue::failed(metric, judge_source(id), e.what(), input.turn_id));
      }
    }
  }
  return out;
}

}  // namespace sds::metrics
