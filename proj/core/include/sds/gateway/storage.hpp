// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sds/gateway/feedback.hpp"
#include "sds/metrics/metric_value.hpp"
#include "sds/orchestrator/pipeline.hpp"

namespace sds::gateway {

struct StorageConfig {
  bool enabled = false;
  std::filesystem::path root_path = "sds-data";
  bool store_audio = true;
  bool privacy_notice_ack_required = true;
};

struct SessionSnapshot {
  std::string session_id;
  orch::PipelineConfig config;
  std::vector<orch::TurnRecord> turns;
  std::vector<FeedbackRating> feedback;
  std::vector<metrics::MetricValue> metrics;
};

/// One JSON line per turn.
std::string render_session_log(const SessionSnapshot& s, const FeedbackScales& scales = {});

/// Writes <root>/<session_id>/session.jsonl and, with store_audio,
/// turn_<n>_user.wav and turn_<n>_system.wav. Every file is written to a
/// temporary name and renamed into place, so readers never see a partial
/// line. Re-persisting rewrites the log with the current turns and leaves
/// existing WAV files alone.
///
/// Throws Errc::StorageDisabled (before touching the filesystem) or
/// Errc::IoFailure. Returns the paths written.
std::vector<std::filesystem::path> persist_session(const SessionSnapshot& s, const StorageConfig& cfg,
                                                   const FeedbackScales& scales = {});

/// Writes `bytes` to `path` via a sibling temporary and rename.
void write_atomically(const std::filesystem::path& path, std::string_view bytes);

}  // namespace sds::gateway
