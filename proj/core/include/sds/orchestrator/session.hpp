// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sds/audio.hpp"
#include "sds/metrics/metric_value.hpp"
#include "sds/orchestrator/executor.hpp"
#include "sds/orchestrator/pipeline.hpp"
#include "sds/orchestrator/turn_metrics.hpp"
#include "sds/vad.hpp"

namespace sds::protocol {
class WorkerRegistry;
}

namespace sds::orch {

enum class State { Loading, Listening, Thinking, Speaking, Expired };

std::string_view to_string(State s) noexcept;

/// Whether the state machine permits `from` -> `to`.
bool transition_allowed(State from, State to) noexcept;

inline constexpr double kSessionLimitS = 300.0;
inline constexpr int kPlaybackChunkMs = 100;

namespace event {
struct VadState {
  bool speaking = false;
  double time_s = 0.0;
};
struct BargeIn {
  double time_s = 0.0;
  int turn_id = 0;
};
struct TurnStarted {
  int turn_id = 0;
  double start_s = 0.0;
  double end_s = 0.0;
};
struct AsrText {
  int turn_id = 0;
  std::string text;
};
struct ResponseText {
  int turn_id = 0;
  std::string text;
};
/// Response audio is available through next_playback_chunk().
struct TurnReady {
  int turn_id = 0;
  LatencyBreakdown latency;
  std::size_t samples = 0;
  bool will_play = true;
};
struct TurnFailed {
  int turn_id = 0;
  std::string error;
};
struct TurnMetrics {
  int turn_id = 0;
  std::vector<metrics::MetricValue> values;
};
enum class StatusKind { Loading, Ready, Error };
struct Status {
  StatusKind kind = StatusKind::Ready;
  std::string detail;
};
struct SessionExpired {
  double time_s = 0.0;
};
}  // namespace event

std::string_view to_string(event::StatusKind k) noexcept;

using SessionEvent =
    std::variant<event::VadState, event::BargeIn, event::TurnStarted, event::AsrText,
                 event::ResponseText, event::TurnReady, event::TurnFailed, event::TurnMetrics,
                 event::Status, event::SessionExpired>;

using EventSink = std::function<void(const SessionEvent&)>;
/// Monotonic seconds.
using Clock = std::function<double()>;

Clock steady_clock_seconds();

struct SessionOptions {
  audio::AudioFormat input_format;
  // Run turns on a per-session thread instead of inside ingest_audio.
  bool async_turns = false;
  bool compute_metrics = true;
  TurnMetricsOptions metrics;
  Clock clock;
  EventSink sink;
  std::optional<std::chrono::milliseconds> deadline;
};

struct PlaybackChunk {
  int turn_id = 0;
  std::vector<std::int16_t> samples;
  audio::AudioFormat format;
  std::size_t offset = 0;
  bool last = false;
};

enum class CancelOutcome { Cancelled, NotSpeaking };

/// One conversation. Audio frames always reach the endpointer; a SpeechEnd
/// heard while Listening dispatches a turn through the configured pipeline.
/// Speech onset while Speaking cancels playback (barge-in); while Thinking
/// it suppresses the pending turn's playback.
///
/// All events go to the sink in the order the state changed. The sink runs
/// on the ingesting thread or the session's executors and must not call
/// ingest_audio, switch_config or close.
class Session {
 public:
  /// Loads the configured models, then enters Listening. Throws
  /// Errc::NoWorkerForTask or Errc::UnknownModel.
  Session(std::string id, PipelineConfig config, protocol::WorkerRegistry& registry,
          SessionOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const noexcept { return id_; }

  /// Throws Errc::SessionExpired once the session cap is passed (the
  /// frame that crosses it expires the session).
  std::vector<SessionEvent> ingest_audio(const audio::AudioFrame& frame);
  /// Frames arbitrary PCM at the session format and ingests each frame.
  std::vector<SessionEvent> ingest_pcm(std::span<const std::int16_t> samples);

  /// Up to 100 ms of the current response; nullopt when nothing is playing.
  /// Handing out the final chunk returns the session to Listening.
  std::optional<PlaybackChunk> next_playback_chunk();
  CancelOutcome cancel_playback();

  /// Enters Loading, loads the new models and returns to Listening. On
  /// failure the previous config stays active and the error is rethrown.
  void switch_config(PipelineConfig config);

  /// Ends the session (terminal) without an expiry event.
  void close();

  /// Expires the session if the wall-clock cap has passed.
  bool check_expiry();

  State state() const;
  PipelineConfig config() const;
  std::vector<TurnRecord> history() const;
  std::optional<TurnRecord> turn(int turn_id) const;
  std::vector<std::pair<State, State>> transitions() const;
  std::vector<metrics::MetricValue> metrics() const;
  double elapsed_s() const;
  const audio::AudioFormat& input_format() const noexcept { return options_.input_format; }

  /// Waits for queued turns and metric computations.
  void wait_idle();

 private:
  struct PendingTurn {
    int turn_id = 0;
    bool suppressed = false;
  };
  struct TurnJob;

  void set_state(State to);
  void load_models(const PipelineConfig& config);
  std::vector<SessionEvent> expire_locked(double time_s);
  TurnJob start_turn_locked(audio::SpeechSegment segment, std::vector<SessionEvent>& events);
  void run_job(TurnJob job);
  TurnRecord execute_turn(const TurnJob& job);
  void commit_turn(TurnRecord record);
  void emit_progress(SessionEvent ev);
  void emit(const std::vector<SessionEvent>& events);

  const std::string id_;
  protocol::WorkerRegistry& registry_;
  SessionOptions options_;

  // Held across a state change and the emission of its events so that the
  // sink observes them in order.
  std::mutex order_mu_;
  mutable std::mutex mu_;
  PipelineConfig config_;
  State state_ = State::Loading;
  double started_s_ = 0.0;
  vad::Endpointer endpointer_;
  audio::Framer framer_;
  // Stream time consumed by framers replaced after a frame size change.
  double time_offset_s_ = 0.0;
  std::vector<TurnRecord> history_;
  std::vector<std::pair<State, State>> transitions_;
  std::vector<metrics::MetricValue> metrics_;
  std::optional<PendingTurn> pending_;
  std::optional<audio::SpeechSegment> queued_segment_;
  int next_turn_id_ = 1;
  // Index into history_ of the turn being played.
  std::optional<std::size_t> playing_;
  std::size_t play_cursor_ = 0;
  std::atomic<bool> muted_{false};

  // Declared last: destroyed first, while the state above is still valid.
  std::unique_ptr<SerialExecutor> metrics_executor_;
  std::unique_ptr<SerialExecutor> turn_executor_;
};

}  // namespace sds::orch
