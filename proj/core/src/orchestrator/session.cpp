// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/orchestrator/session.hpp"

#include <algorithm>

#include "sds/error.hpp"
#include "sds/protocol/registry.hpp"

namespace sds::orch {

std::string_view to_string(State s) noexcept {
  switch (s) {
    case State::Loading: return "loading";
    case State::Listening: return "listening";
    case State::Thinking: return "thinking";
    case State::Speaking: return "speaking";
    case State::Expired: return "expired";
  }
  return "?";
}

std::string_view to_string(event::StatusKind k) noexcept {
  switch (k) {
    case event::StatusKind::Loading: return "loading";
    case event::StatusKind::Ready: return "ready";
    case event::StatusKind::Error: return "error";
  }
  return "?";
}

bool transition_allowed(State from, State to) noexcept {
  if (from == State::Expired) return false;
  switch (to) {
    case State::Expired:
    case State::Loading:
      return true;
    case State::Listening:
      return from == State::Loading || from == State::Thinking || from == State::Speaking;
    case State::Thinking:
      return from == State::Listening;
    case State::Speaking:
      return from == State::Thinking;
  }
  return false;
}

Clock steady_clock_seconds() {
  return [] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
  };
}

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

struct Session::TurnJob {
  audio::SpeechSegment segment;
  PipelineConfig config;
  int turn_id = 0;
  std::vector<TurnRecord> prior;
  std::chrono::steady_clock::time_point t0;
};

Session::Session(std::string id, PipelineConfig config, protocol::WorkerRegistry& registry,
                 SessionOptions options)
    : id_(std::move(id)),
      registry_(registry),
      options_(std::move(options)),
      config_(std::move(config)),
      endpointer_(config_.vad),
      framer_(options_.input_format, config_.vad.frame_ms) {
  config_.validate();
  audio::validate(options_.input_format);
  if (!options_.clock) options_.clock = steady_clock_seconds();
  emit({event::Status{event::StatusKind::Loading, {}}});
  load_models(config_);
  started_s_ = options_.clock();
  {
    std::lock_guard lock(mu_);
    set_state(State::Listening);
  }
  if (options_.async_turns) turn_executor_ = std::make_unique<SerialExecutor>();
  if (options_.compute_metrics) metrics_executor_ = std::make_unique<SerialExecutor>();
  emit({event::Status{event::StatusKind::Ready, {}}});
}

Session::~Session() {
  muted_ = true;
  turn_executor_.reset();
  metrics_executor_.reset();
}

void Session::set_state(State to) {
  if (to == state_) return;
  if (!transition_allowed(state_, to)) {
    throw Error(Errc::InvariantViolation,
                "illegal transition " + std::string(to_string(state_)) + " -> " + std::string(to_string(to)));
  }
  transitions_.emplace_back(state_, to);
  state_ = to;
}

void Session::load_models(const PipelineConfig& config) {
  using protocol::Task;
  const auto deadline = options_.deadline;
  if (config.mode == Mode::Cascaded) {
    registry_.select_model(Task::Asr, *config.asr_model, deadline);
    registry_.select_model(Task::Llm, *config.llm_model, deadline);
    registry_.select_model(Task::Tts, *config.tts_model, deadline);
  } else {
    registry_.select_model(Task::E2e, *config.e2e_model, deadline);
  }
}

void Session::emit(const std::vector<SessionEvent>& events) {
  if (muted_ || !options_.sink) return;
  for (const auto& e : events) options_.sink(e);
}

std::vector<SessionEvent> Session::expire_locked(double time_s) {
  set_state(State::Expired);
  playing_.reset();
  pending_.reset();
  queued_segment_.reset();
  return {event::SessionExpired{time_s}};
}

std::vector<SessionEvent> Session::ingest_audio(const audio::AudioFrame& frame) {
  std::vector<SessionEvent> events;
  std::optional<TurnJob> job;
  bool expired_now = false;
  {
    std::lock_guard order(order_mu_);
    {
      std::lock_guard lock(mu_);
      if (state_ == State::Expired) throw Error(Errc::SessionExpired, "session " + id_ + " has expired");
      const double elapsed = options_.clock() - started_s_;
      if (frame.start_time_s > kSessionLimitS || elapsed > kSessionLimitS) {
        events = expire_locked(std::max(frame.start_time_s, elapsed));
        expired_now = true;
      } else {
        for (auto& ev : endpointer_.push(frame)) {
          if (const auto* start = std::get_if<vad::SpeechStart>(&ev)) {
            events.push_back(event::VadState{true, start->time_s});
            if (state_ == State::Speaking && playing_) {
              const int turn_id = history_[*playing_].turn_id;
              history_[*playing_].interrupted = true;
              playing_.reset();
              set_state(State::Listening);
              events.push_back(event::BargeIn{start->time_s, turn_id});
            } else if (state_ == State::Thinking && pending_) {
              pending_->suppressed = true;
              events.push_back(event::BargeIn{start->time_s, pending_->turn_id});
            }
          } else {
            auto& end = std::get<vad::SpeechEnd>(ev);
            events.push_back(event::VadState{false, end.segment.end_s});
            if (state_ == State::Listening) {
              job = start_turn_locked(std::move(end.segment), events);
            } else if (state_ == State::Thinking) {
              queued_segment_ = std::move(end.segment);
            }
          }
        }
      }
    }
    emit(events);
  }
  if (expired_now) throw Error(Errc::SessionExpired, "session " + id_ + " reached its time limit");
  if (job) run_job(std::move(*job));
  return events;
}

std::vector<SessionEvent> Session::ingest_pcm(std::span<const std::int16_t> samples) {
  std::vector<audio::AudioFrame> frames;
  double offset = 0.0;
  {
    std::lock_guard lock(mu_);
    frames = framer_.push(samples);
    offset = time_offset_s_;
  }
  std::vector<SessionEvent> all;
  for (auto& f : frames) {
    f.start_time_s += offset;
    auto events = ingest_audio(f);
    all.insert(all.end(), std::make_move_iterator(events.begin()), std::make_move_iterator(events.end()));
  }
  return all;
}

Session::TurnJob Session::start_turn_locked(audio::SpeechSegment segment, std::vector<SessionEvent>& events) {
  TurnJob job;
  job.t0 = std::chrono::steady_clock::now();
  job.turn_id = next_turn_id_++;
  job.config = config_;
  // Text fields suffice for the LLM context; skip the audio.
  for (const auto& t : history_) {
    TurnRecord lite;
    lite.turn_id = t.turn_id;
    lite.asr_text = t.asr_text;
    lite.response_text = t.response_text;
    lite.failed = t.failed;
    job.prior.push_back(std::move(lite));
  }
  set_state(State::Thinking);
  pending_ = PendingTurn{job.turn_id, false};
  events.push_back(event::TurnStarted{job.turn_id, segment.start_s, segment.end_s});
  job.segment = std::move(segment);
  return job;
}

void Session::run_job(TurnJob job) {
  if (turn_executor_) {
    auto shared = std::make_shared<TurnJob>(std::move(job));
    turn_executor_->post([this, shared] { commit_turn(execute_turn(*shared)); });
  } else {
    commit_turn(execute_turn(job));
  }
}

void Session::emit_progress(SessionEvent ev) {
  std::lock_guard order(order_mu_);
  {
    std::lock_guard lock(mu_);
    if (state_ == State::Expired) return;
  }
  emit({std::move(ev)});
}

TurnRecord Session::execute_turn(const TurnJob& job) {
  using protocol::Task;
  TurnRecord rec;
  rec.turn_id = job.turn_id;
  rec.mode = job.config.mode;
  rec.user_segment = job.segment;
  const auto deadline = options_.deadline;
  try {
    // Another session may have switched a shared slot since this one loaded.
    load_models(job.config);
    const auto user_audio = job.segment.audio();
    if (job.config.mode == Mode::Cascaded) {
      const auto asr = registry_.dispatch_infer(Task::Asr, nlohmann::json::object(), user_audio, deadline);
      rec.latency.asr_ms = asr.latency_ms;
      rec.asr_text = asr.body.value("text", std::string());
      emit_progress(event::AsrText{rec.turn_id, *rec.asr_text});

      rec.context = build_llm_context(job.prior, *rec.asr_text);
      const auto llm = registry_.dispatch_infer(
          Task::Llm, {{"context", rec.context}, {"text", *rec.asr_text}}, std::nullopt, deadline);
      rec.latency.llm_ms = llm.latency_ms;
      rec.response_text = llm.body.value("text", std::string());
      emit_progress(event::ResponseText{rec.turn_id, rec.response_text});

      const auto tts = registry_.dispatch_infer(Task::Tts, {{"text", rec.response_text}}, std::nullopt, deadline);
      rec.latency.tts_ms = tts.latency_ms;
      if (tts.audio) rec.response_audio = *tts.audio;
    } else {
      const auto e2e = registry_.dispatch_infer(Task::E2e, nlohmann::json::object(), user_audio, deadline);
      rec.latency.e2e_ms = e2e.latency_ms;
      rec.response_text = e2e.body.value("text", std::string());
      emit_progress(event::ResponseText{rec.turn_id, rec.response_text});
      if (e2e.audio) rec.response_audio = *e2e.audio;
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  rec.latency.total_ms = ms_since(job.t0);
  return rec;
}

void Session::commit_turn(TurnRecord record) {
  std::vector<SessionEvent> events;
  std::optional<TurnJob> next;
  std::shared_ptr<std::vector<std::string>> responses;
  {
    std::lock_guard order(order_mu_);
    {
      std::lock_guard lock(mu_);
      if (state_ == State::Expired) return;
      // A turn superseded by a config switch no longer owns the state.
      const bool current = pending_ && pending_->turn_id == record.turn_id;
      const bool suppressed = !current || pending_->suppressed;
      if (current) pending_.reset();
      if (suppressed) record.interrupted = true;
      history_.push_back(record);
      const auto& rec = history_.back();

      if (rec.failed) {
        events.push_back(event::TurnFailed{rec.turn_id, rec.error});
        if (current && state_ == State::Thinking) set_state(State::Listening);
      } else {
        const bool will_play = !suppressed && state_ == State::Thinking && !rec.response_audio.empty();
        events.push_back(event::TurnReady{rec.turn_id, rec.latency, rec.response_audio.samples.size(), will_play});
        if (will_play) {
          set_state(State::Speaking);
          playing_ = history_.size() - 1;
          play_cursor_ = 0;
        } else if (current && state_ == State::Thinking) {
          set_state(State::Listening);
        }
        if (metrics_executor_) {
          responses = std::make_shared<std::vector<std::string>>();
          for (const auto& t : history_) {
            if (!t.failed) responses->push_back(t.response_text);
          }
        }
      }
      if (state_ == State::Listening && queued_segment_) {
        auto seg = std::move(*queued_segment_);
        queued_segment_.reset();
        next = start_turn_locked(std::move(seg), events);
      }
    }
    emit(events);
  }

  if (responses) {
    auto rec = std::make_shared<TurnRecord>(std::move(record));
    metrics_executor_->post([this, rec, responses] {
      auto values = compute_turn_metrics(registry_, *rec, *responses, options_.metrics);
      std::lock_guard order(order_mu_);
      {
        std::lock_guard lock(mu_);
        if (state_ == State::Expired) return;
        metrics_.insert(metrics_.end(), values.begin(), values.end());
      }
      emit({event::TurnMetrics{rec->turn_id, std::move(values)}});
    });
  }
  if (next) run_job(std::move(*next));
}

std::optional<PlaybackChunk> Session::next_playback_chunk() {
  std::lock_guard lock(mu_);
  if (state_ != State::Speaking || !playing_) return std::nullopt;
  auto& rec = history_[*playing_];
  const auto& audio = rec.response_audio;
  const auto chunk = static_cast<std::size_t>(audio.format.sample_rate_hz) * kPlaybackChunkMs / 1000;
  const auto n = std::min(chunk, audio.samples.size() - play_cursor_);

  PlaybackChunk out;
  out.turn_id = rec.turn_id;
  out.format = audio.format;
  out.offset = play_cursor_;
  const auto begin = audio.samples.begin() + static_cast<std::ptrdiff_t>(play_cursor_);
  out.samples.assign(begin, begin + static_cast<std::ptrdiff_t>(n));
  play_cursor_ += n;
  rec.played_samples = play_cursor_;
  if (play_cursor_ >= audio.samples.size()) {
    out.last = true;
    playing_.reset();
    set_state(State::Listening);
  }
  return out;
}

CancelOutcome Session::cancel_playback() {
  std::lock_guard lock(mu_);
  if (state_ != State::Speaking || !playing_) return CancelOutcome::NotSpeaking;
  history_[*playing_].interrupted = true;
  playing_.reset();
  set_state(State::Listening);
  return CancelOutcome::Cancelled;
}

void Session::switch_config(PipelineConfig config) {
  config.validate();
  PipelineConfig previous;
  {
    std::lock_guard order(order_mu_);
    {
      std::lock_guard lock(mu_);
      if (state_ == State::Expired) throw Error(Errc::SessionExpired, "session " + id_ + " has expired");
      previous = config_;
      if (state_ == State::Speaking && playing_) {
        history_[*playing_].interrupted = true;
        playing_.reset();
      }
      // The in-flight turn belongs to the old pipeline. A segment queued behind
      // it would otherwise start after newer speech.
      if (pending_) pending_->suppressed = true;
      queued_segment_.reset();
      set_state(State::Loading);
    }
    emit({event::Status{event::StatusKind::Loading, {}}});
  }

  std::exception_ptr failure;
  try {
    load_models(config);
  } catch (...) {
    failure = std::current_exception();
    try {
      load_models(previous);
    } catch (...) {
      // The previous models stay unavailable; the next turn reports it.
    }
  }

  std::string detail;
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      detail = e.what();
    }
  }
  {
    std::lock_guard order(order_mu_);
    {
      std::lock_guard lock(mu_);
      if (state_ == State::Expired) {
        if (failure) std::rethrow_exception(failure);
        return;
      }
      if (!failure) {
        if (!(config.vad == config_.vad)) {
          endpointer_ = vad::Endpointer(config.vad);
          time_offset_s_ += static_cast<double>(framer_.samples_consumed()) / options_.input_format.sample_rate_hz;
          framer_ = audio::Framer(options_.input_format, config.vad.frame_ms);
        }
        config_ = std::move(config);
      }
      set_state(State::Listening);
    }
    if (failure) {
      emit({event::Status{event::StatusKind::Error, detail}});
    } else {
      emit({event::Status{event::StatusKind::Ready, {}}});
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void Session::close() {
  std::lock_guard lock(mu_);
  if (state_ != State::Expired) {
    set_state(State::Expired);
    playing_.reset();
    pending_.reset();
    queued_segment_.reset();
  }
}

bool Session::check_expiry() {
  std::vector<SessionEvent> events;
  std::lock_guard order(order_mu_);
  {
    std::lock_guard lock(mu_);
    if (state_ == State::Expired) return false;
    const double elapsed = options_.clock() - started_s_;
    if (elapsed <= kSessionLimitS) return false;
    events = expire_locked(elapsed);
  }
  emit(events);
  return true;
}

State Session::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

PipelineConfig Session::config() const {
  std::lock_guard lock(mu_);
  return config_;
}

std::vector<TurnRecord> Session::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

std::optional<TurnRecord> Session::turn(int turn_id) const {
  std::lock_guard lock(mu_);
  for (const auto& t : history_) {
    if (t.turn_id == turn_id) return t;
  }
  return std::nullopt;
}

std::vector<std::pair<State, State>> Session::transitions() const {
  std::lock_guard lock(mu_);
  return transitions_;
}

std::vector<metrics::MetricValue> Session::metrics() const {
  std::lock_guard lock(mu_);
  return metrics_;
}

double Session::elapsed_s() const { return options_.clock() - started_s_; }

void Session::wait_idle() {
  if (turn_executor_) turn_executor_->drain();
  if (metrics_executor_) metrics_executor_->drain();
  if (turn_executor_) turn_executor_->drain();
}

}  // namespace sds::orch
