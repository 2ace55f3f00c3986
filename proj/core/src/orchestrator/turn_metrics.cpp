// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/orchestrator/turn_metrics.hpp"

#include "sds/metrics/bleu.hpp"
#include "sds/metrics/conversation.hpp"
#include "sds/metrics/text.hpp"

namespace sds::orch {

using metrics::MetricValue;

std::vector<std::string> default_judge_metrics() {
  std::vector<std::string> out{std::string(metrics::kWer), std::string(metrics::kCer)};
  for (const auto m : metrics::kAudioQualityMetrics) out.emplace_back(m);
  for (const auto m : metrics::kTextJudgeMetrics) out.emplace_back(m);
  return out;
}

metrics::JudgeInput judge_input_for(const TurnRecord& turn) {
  metrics::JudgeInput in;
  in.turn_id = turn.turn_id;
  in.user_text = turn.asr_text;
  in.user_audio = turn.user_segment.audio();
  in.context = turn.context;
  in.response_text = turn.response_text;
  if (!turn.response_audio.empty()) in.response_audio = turn.response_audio;
  return in;
}

std::vector<MetricValue> compute_turn_metrics(protocol::WorkerRegistry& registry, const TurnRecord& turn,
                                              std::span<const std::string> responses,
                                              const TurnMetricsOptions& options) {
  std::vector<MetricValue> out;
  const int id = turn.turn_id;

  if (turn.asr_text) {
    const metrics::SpokenTurn spoken{metrics::normalize_text(*turn.asr_text).size(),
                                     turn.user_segment.duration_s()};
    out.push_back(MetricValue::native("speaking_rate_wpm", metrics::speaking_rate({&spoken, 1}), id));
  } else {
    out.push_back(MetricValue::skipped("speaking_rate_wpm", "no ASR transcript", id));
  }

  const auto response = metrics::normalize_text(turn.response_text);
  if (response.size() >= 2) {
    out.push_back(MetricValue::native("auto_bleu2", 100.0 * metrics::auto_bleu2_sentence(response), id));
  } else {
    out.push_back(MetricValue::skipped("auto_bleu2", "response shorter than two words", id));
  }

  std::vector<metrics::TokenSequence> corpus;
  for (const auto& r : responses) {
    auto tokens = metrics::normalize_text(r);
    if (!tokens.empty()) corpus.push_back(std::move(tokens));
  }
  if (corpus.size() >= 2) {
    const auto d = metrics::diversity(corpus);
    out.push_back(MetricValue::native("self_bleu2", d.self_bleu2, id));
    out.push_back(MetricValue::native("session_auto_bleu2", d.auto_bleu2, id));
    out.push_back(MetricValue::native("vert", d.vert, id));
  } else {
    for (const char* name : {"self_bleu2", "session_auto_bleu2", "vert"}) {
      out.push_back(MetricValue::skipped(name, "needs two responses", id));
    }
  }

  for (auto& m : metrics::request_judge_metrics(registry, judge_input_for(turn), options.judge_metrics,
                                                options.deadline)) {
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace sds::orch
