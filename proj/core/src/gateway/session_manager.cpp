// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/gateway/session_manager.hpp"

#include <chrono>

#include "sds/error.hpp"

namespace sds::gateway {

SessionManager::SessionManager(protocol::WorkerRegistry& registry, GatewayOptions options)
    : registry_(registry), options_(std::move(options)) {}

SessionManager::~SessionManager() {
  std::map<std::string, std::shared_ptr<Entry>> sessions;
  {
    std::lock_guard lock(mu_);
    sessions.swap(sessions_);
  }
  for (auto& [id, e] : sessions) {
    std::lock_guard lock(e->mu);
    e->listener = nullptr;
  }
}

std::string SessionManager::create(orch::PipelineConfig config) {
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = "session-" + std::to_string(next_id_++);
  }
  auto entry = std::make_shared<Entry>();
  std::weak_ptr<Entry> weak = entry;

  orch::SessionOptions so;
  so.input_format = options_.input_format;
  so.async_turns = options_.async_turns;
  so.compute_metrics = options_.compute_metrics;
  so.metrics = options_.metrics;
  so.clock = options_.clock;
  so.deadline = options_.deadline;
  so.sink = [weak](const orch::SessionEvent& ev) {
    const auto e = weak.lock();
    if (!e) return;
    std::function<void(const orch::SessionEvent&)> listener;
    {
      std::lock_guard lock(e->mu);
      listener = e->listener;
    }
    if (listener) listener(ev);
  };
  entry->session = std::make_shared<orch::Session>(id, std::move(config), registry_, std::move(so));

  std::lock_guard lock(mu_);
  sessions_[id] = std::move(entry);
  return id;
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::UnknownSession, id);
  return it->second;
}

void SessionManager::remove(const std::string& id) {
  std::shared_ptr<Entry> entry;
  {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    entry = std::move(it->second);
    sessions_.erase(it);
  }
  {
    std::lock_guard lock(entry->mu);
    entry->listener = nullptr;
  }
  entry->session->close();
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, e] : sessions_) out.push_back(id);
  return out;
}

void SessionManager::set_listener(const std::string& id,
                                  std::function<void(const orch::SessionEvent&)> listener) {
  const auto e = find(id);
  std::lock_guard lock(e->mu);
  e->listener = std::move(listener);
}

FeedbackRating SessionManager::record_feedback(const std::string& id, int turn_id, Dimension dimension,
                                               int level) {
  const auto e = find(id);
  validate_level(level);
  if (!e->session->turn(turn_id)) throw Error(Errc::UnknownTurn, "turn " + std::to_string(turn_id));
  FeedbackRating r;
  r.turn_id = turn_id;
  r.dimension = dimension;
  r.level = level;
  r.timestamp = std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
  std::lock_guard lock(e->mu);
  e->feedback.push_back(r);
  return r;
}

std::vector<FeedbackRating> SessionManager::feedback(const std::string& id) const {
  const auto e = find(id);
  std::lock_guard lock(e->mu);
  return e->feedback;
}

void SessionManager::acknowledge_privacy(const std::string& id) {
  const auto e = find(id);
  std::lock_guard lock(e->mu);
  e->privacy_acked = true;
}

bool SessionManager::storage_active(const std::string& id) const {
  if (!options_.storage.enabled) return false;
  const auto e = find(id);
  std::lock_guard lock(e->mu);
  return e->privacy_acked || !options_.storage.privacy_notice_ack_required;
}

std::vector<std::filesystem::path> SessionManager::persist(const std::string& id) {
  if (!options_.storage.enabled) throw Error(Errc::StorageDisabled, "session storage is disabled");
  const auto e = find(id);
  SessionSnapshot snap;
  {
    std::lock_guard lock(e->mu);
    if (options_.storage.privacy_notice_ack_required && !e->privacy_acked) {
      throw Error(Errc::PrivacyNoticeRequired, "client has not acknowledged the privacy notice");
    }
    snap.feedback = e->feedback;
  }
  snap.session_id = id;
  snap.config = e->session->config();
  snap.turns = e->session->history();
  snap.metrics = e->session->metrics();
  return persist_session(snap, options_.storage, options_.scales);
}

nlohmann::json SessionManager::metrics_json(const std::string& id) const {
  const auto e = find(id);
  const auto& s = *e->session;
  auto turns = nlohmann::json::array();
  for (const auto& t : s.history()) turns.push_back(orch::turn_summary(t));
  std::vector<FeedbackRating> feedback;
  {
    std::lock_guard lock(e->mu);
    feedback = e->feedback;
  }
  auto fb = nlohmann::json::object();
  for (const auto d : {Dimension::Naturalness, Dimension::Relevance}) {
    const auto a = aggregate(feedback, d);
    const auto pct = a.percentages();
    auto levels = nlohmann::json::array();
    for (int level = 1; level <= kLevels; ++level) {
      const auto i = static_cast<std::size_t>(level - 1);
      levels.push_back({{"level", level},
                        {"label", options_.scales.label(d, level)},
                        {"count", a.counts[i]},
                        {"percent", pct[i]}});
    }
    fb[std::string(to_string(d))] = {{"total", a.total}, {"levels", levels}};
  }
  return {{"session_id", id},
          {"state", orch::to_string(s.state())},
          {"config", s.config()},
          {"turns", turns},
          {"metrics", s.metrics()},
          {"feedback", fb}};
}

}  // namespace sds::gateway
