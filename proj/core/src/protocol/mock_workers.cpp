// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/protocol/mock_workers.hpp"

#include <cmath>
#include <cstdio>
#include <thread>

#include "sds/error.hpp"
#include "sds/protocol/registry.hpp"

namespace sds::protocol::mock {

std::string echo_transcript(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "mock transcript %.2fs", seconds);
  return buf;
}

std::string e2e_reply(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "mock e2e reply to %.2fs", seconds);
  return buf;
}

std::size_t char_count(std::string_view utf8) {
  std::size_t n = 0;
  for (const char c : utf8) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

double tone_seconds_for(std::string_view text) {
  const auto blocks = (char_count(text) + 9) / 10;
  return 0.5 * static_cast<double>(blocks);
}

audio::AudioBuffer tone_for_text(std::string_view text) {
  audio::AudioBuffer out;
  out.format = {kToneRateHz, 1};
  out.samples = audio::sine(kToneFrequencyHz, tone_seconds_for(text), kToneRateHz, 0.5);
  return out;
}

const std::map<std::string, double>& canned_judge_values() {
  static const std::map<std::string, double> values = {
      {"utmos", 4.0},        {"dns_overall", 3.2},          {"dns_p808", 3.6},
      {"plcmos", 4.1},       {"ssqa", 3.9},                 {"perplexity", 30.0},
      {"bert_similarity", 0.5}, {"dialogpt_perplexity", 150.0},
  };
  return values;
}

void EventLog::add(std::string entry) {
  std::lock_guard lock(mu_);
  entries_.push_back(std::move(entry));
}

std::vector<std::string> EventLog::snapshot() const {
  std::lock_guard lock(mu_);
  return entries_;
}

void EventLog::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
}

MockHandler::MockHandler(Hello hello, std::shared_ptr<EventLog> log)
    : hello_(std::move(hello)), log_(log ? std::move(log) : std::make_shared<EventLog>()) {}

void MockHandler::load(const std::string& model_id) {
  if (load_delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(load_delay_ms_));
  bool known = false;
  for (const auto& m : hello_.models) known = known || m == model_id;
  if (!known) throw Error(Errc::UnknownModel, model_id);
  {
    std::lock_guard lock(mu_);
    loaded_ = model_id;
  }
  ++loads_;
  log_->add(hello_.worker_id + ":load:" + model_id);
}

void MockHandler::unload() {
  {
    std::lock_guard lock(mu_);
    loaded_.reset();
  }
  ++unloads_;
  log_->add(hello_.worker_id + ":unload");
}

std::optional<std::string> MockHandler::loaded() const {
  std::lock_guard lock(mu_);
  return loaded_;
}

void MockHandler::fail_next_infer(std::string message) {
  std::lock_guard lock(mu_);
  fail_next_ = std::move(message);
}

InferOutput MockHandler::infer(const nlohmann::json& body,
                               const std::optional<audio::AudioBuffer>& audio) {
  ++infers_;
  if (infer_delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(infer_delay_ms_));
  std::string failure;
  {
    std::lock_guard lock(mu_);
    failure.swap(fail_next_);
    if (failure.empty() && requires_load() && !loaded_) failure = "no model loaded";
  }
  if (!failure.empty()) throw std::runtime_error(failure);
  return respond(body, audio);
}

namespace {

Hello make_hello(std::string id, Task task, std::vector<std::string> models,
                 std::vector<std::string> metrics = {}) {
  return Hello{std::move(id), task, std::move(models), std::move(metrics)};
}

const audio::AudioBuffer& require_audio(const std::optional<audio::AudioBuffer>& audio) {
  if (!audio) throw Error(Errc::MalformedMessage, "request carries no audio");
  return *audio;
}

}  // namespace

EchoAsr::EchoAsr(std::string worker_id, std::vector<std::string> models, std::shared_ptr<EventLog> log)
    : MockHandler(make_hello(std::move(worker_id), Task::Asr, std::move(models)), std::move(log)) {}

InferOutput EchoAsr::respond(const nlohmann::json&, const std::optional<audio::AudioBuffer>& audio) {
  return {{{"text", echo_transcript(require_audio(audio).duration_s())}}, std::nullopt};
}

TemplateLlm::TemplateLlm(std::string worker_id, std::vector<std::string> models,
                         std::shared_ptr<EventLog> log)
    : MockHandler(make_hello(std::move(worker_id), Task::Llm, std::move(models)), std::move(log)) {}

InferOutput TemplateLlm::respond(const nlohmann::json& body, const std::optional<audio::AudioBuffer>&) {
  return {{{"text", "echo: " + body.value("text", std::string())}}, std::nullopt};
}

ToneTts::ToneTts(std::string worker_id, std::vector<std::string> models, std::shared_ptr<EventLog> log)
    : MockHandler(make_hello(std::move(worker_id), Task::Tts, std::move(models)), std::move(log)) {}

InferOutput ToneTts::respond(const nlohmann::json& body, const std::optional<audio::AudioBuffer>&) {
  return {nlohmann::json::object(), tone_for_text(body.value("text", std::string()))};
}

MockE2e::MockE2e(std::string worker_id, std::vector<std::string> models, std::shared_ptr<EventLog> log)
    : MockHandler(make_hello(std::move(worker_id), Task::E2e, std::move(models)), std::move(log)) {}

InferOutput MockE2e::respond(const nlohmann::json&, const std::optional<audio::AudioBuffer>& audio) {
  const auto text = e2e_reply(require_audio(audio).duration_s());
  return {{{"text", text}}, tone_for_text(text)};
}

MockJudge::MockJudge(std::string worker_id, std::vector<std::string> metrics,
                     std::shared_ptr<EventLog> log)
    : MockHandler(make_hello(worker_id, Task::Judge, {worker_id + "-model"}, std::move(metrics)),
                  std::move(log)) {}

InferOutput MockJudge::respond(const nlohmann::json& body,
                               const std::optional<audio::AudioBuffer>& audio) {
  const auto metric = body.value("metric", std::string());
  const auto& advertised = hello().judge_metrics;
  if (std::find(advertised.begin(), advertised.end(), metric) == advertised.end()) {
    throw Error(Errc::WorkerError, "metric '" + metric + "' not served");
  }
  if (metric == kTranscriptMetric) {
    return {{{"metric", metric}, {"text", echo_transcript(require_audio(audio).duration_s())}},
            std::nullopt};
  }
  const auto& values = canned_judge_values();
  const auto it = values.find(metric);
  if (it == values.end()) throw Error(Errc::WorkerError, "no canned value for '" + metric + "'");
  return {{{"metric", metric}, {"value", it->second}}, std::nullopt};
}

std::shared_ptr<MockHandler> make_mock(const std::string& kind, const std::string& worker_id,
                                       std::shared_ptr<EventLog> log) {
  if (kind == "asr") return std::make_shared<EchoAsr>(worker_id, std::vector<std::string>{"echo-asr"}, log);
  if (kind == "llm") {
    return std::make_shared<TemplateLlm>(worker_id, std::vector<std::string>{"template-llm"}, log);
  }
  if (kind == "tts") return std::make_shared<ToneTts>(worker_id, std::vector<std::string>{"tone-tts"}, log);
  if (kind == "e2e") return std::make_shared<MockE2e>(worker_id, std::vector<std::string>{"mock-e2e"}, log);
  if (kind == "judge") {
    std::vector<std::string> metrics;
    for (const auto& [name, value] : canned_judge_values()) metrics.push_back(name);
    return std::make_shared<MockJudge>(worker_id, metrics, log);
  }
  if (kind == "asr-judge") {
    return std::make_shared<MockJudge>(worker_id, std::vector<std::string>{std::string(kTranscriptMetric)},
                                       log);
  }
  throw Error(Errc::InvalidArgument, "unknown mock kind '" + kind + "'");
}

MockWorkerSet::MockWorkerSet(WorkerRegistry& registry, MockSetOptions options)
    : log_(std::make_shared<EventLog>()) {
  const std::vector<std::tuple<bool, const char*, const char*>> plan = {
      {options.asr, "asr", "mock-asr"},
      {options.llm, "llm", "mock-llm"},
      {options.tts, "tts", "mock-tts"},
      {options.e2e, "e2e", "mock-e2e"},
      {options.quality_judge, "judge", "mockq"},
      {options.transcript_judge, "asr-judge", "mock-asr-judge"},
  };
  for (const auto& [enabled, kind, id] : plan) {
    if (!enabled) continue;
    auto handler = make_mock(kind, id, log_);
    handlers_[id] = handler;
    workers_[id] = std::make_unique<InProcessWorker>(registry, handler);
  }
}

MockWorkerSet::~MockWorkerSet() = default;

MockHandler* MockWorkerSet::handler(const std::string& worker_id) const {
  const auto it = handlers_.find(worker_id);
  return it == handlers_.end() ? nullptr : it->second.get();
}

InProcessWorker* MockWorkerSet::worker(const std::string& worker_id) const {
  const auto it = workers_.find(worker_id);
  return it == workers_.end() ? nullptr : it->second.get();
}

}  // namespace sds::protocol::mock
