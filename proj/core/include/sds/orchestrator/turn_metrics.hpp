// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sds/metrics/judge.hpp"
#include "sds/metrics/metric_value.hpp"
#include "sds/orchestrator/pipeline.hpp"

namespace sds::protocol {
class WorkerRegistry;
}

namespace sds::orch {

/// wer, cer, the audio quality metrics and the text judge metrics.
std::vector<std::string> default_judge_metrics();

struct TurnMetricsOptions {
  std::vector<std::string> judge_metrics = default_judge_metrics();
  std::optional<std::chrono::milliseconds> deadline;
};

metrics::JudgeInput judge_input_for(const TurnRecord& turn);

/// Metrics for one completed turn. Native values: the user's speaking rate
/// (cascaded only), auto-BLEU-2 of the response, and self-BLEU-2 and VERT
/// over the session's responses so far. Judge values follow
/// request_judge_metrics; absent judges give skipped entries.
/// `responses` holds the session's successful responses including this one.
std::vector<metrics::MetricValue> compute_turn_metrics(protocol::WorkerRegistry& registry,
                                                       const TurnRecord& turn,
                                                       std::span<const std::string> responses,
                                                       const TurnMetricsOptions& options = {});

}  // namespace sds::orch
