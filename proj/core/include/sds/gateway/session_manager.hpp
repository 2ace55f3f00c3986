// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sds/gateway/feedback.hpp"
#include "sds/gateway/messages.hpp"
#include "sds/gateway/storage.hpp"
#include "sds/orchestrator/session.hpp"

namespace sds::protocol {
class WorkerRegistry;
}

namespace sds::gateway {

struct GatewayOptions {
  StorageConfig storage;
  FeedbackScales scales;
  audio::AudioFormat input_format;
  bool async_turns = true;
  bool compute_metrics = true;
  orch::TurnMetricsOptions metrics;
  orch::Clock clock;
  std::optional<std::chrono::milliseconds> deadline;
};

inline constexpr std::string_view kPrivacyNotice =
    "Recording is enabled on this server. Your audio, transcripts, system responses and ratings "
    "will be stored for research. Send privacy_ack to consent; otherwise nothing is stored.";

/// Live sessions plus their feedback and privacy state. Events from a
/// session go to whichever listener is attached (none until a client
/// connects).
class SessionManager {
 public:
  struct Entry {
    std::shared_ptr<orch::Session> session;

    mutable std::mutex mu;
    std::vector<FeedbackRating> feedback;
    bool privacy_acked = false;
    std::function<void(const orch::SessionEvent&)> listener;
  };

  SessionManager(protocol::WorkerRegistry& registry, GatewayOptions options = {});
  ~SessionManager();

  /// Throws what Session's constructor throws.
  std::string create(orch::PipelineConfig config);
  /// Throws Errc::UnknownSession.
  std::shared_ptr<Entry> find(const std::string& id) const;
  void remove(const std::string& id);
  std::vector<std::string> ids() const;

  void set_listener(const std::string& id, std::function<void(const orch::SessionEvent&)> listener);

  /// Throws Errc::UnknownSession, Errc::UnknownTurn or Errc::InvalidLevel.
  FeedbackRating record_feedback(const std::string& id, int turn_id, Dimension dimension, int level);
  std::vector<FeedbackRating> feedback(const std::string& id) const;

  void acknowledge_privacy(const std::string& id);
  /// Storage is on for the server and, when required, the client consented.
  bool storage_active(const std::string& id) const;
  /// Throws Errc::StorageDisabled or Errc::PrivacyNoticeRequired without
  /// writing anything.
  std::vector<std::filesystem::path> persist(const std::string& id);

  nlohmann::json metrics_json(const std::string& id) const;

  const GatewayOptions& options() const noexcept { return options_; }
  protocol::WorkerRegistry& registry() noexcept { return registry_; }

 private:
  protocol::WorkerRegistry& registry_;
  GatewayOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace sds::gateway
