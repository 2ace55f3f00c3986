// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "sds/protocol/worker.hpp"

namespace sds::protocol {

class WorkerRegistry;

namespace mock {

// Deterministic stand-ins for model workers.
//   echo-ASR      text = "mock transcript <seconds, 2 decimals>s"
//   template-LLM  text = "echo: " + body.text
//   tone-TTS      440 Hz sine at 16 kHz, 0.5 s per started block of 10 characters
//   mock-E2E      template text + tone for that text
//   mock judge    canned constant per metric

inline constexpr int kToneRateHz = 16000;
inline constexpr double kToneFrequencyHz = 440.0;

std::string echo_transcript(double seconds);
/// Code points in UTF-8 text.
std::size_t char_count(std::string_view utf8);
double tone_seconds_for(std::string_view text);
audio::AudioBuffer tone_for_text(std::string_view text);
std::string e2e_reply(double seconds);

/// Canned values served by the quality/text judge.
const std::map<std::string, double>& canned_judge_values();

/// Shared record of worker-side operations, e.g. "mock-asr:load:echo-asr".
class EventLog {
 public:
  void add(std::string entry);
  std::vector<std::string> snapshot() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<std::string> entries_;
};

/// Common bookkeeping; subclasses implement `respond`.
class MockHandler : public WorkerHandler {
 public:
  MockHandler(Hello hello, std::shared_ptr<EventLog> log);

  Hello hello() const override { return hello_; }
  void load(const std::string& model_id) override;
  void unload() override;
  InferOutput infer(const nlohmann::json& body,
                    const std::optional<audio::AudioBuffer>& audio) override;

  int load_count() const noexcept { return loads_; }
  int unload_count() const noexcept { return unloads_; }
  int infer_count() const noexcept { return infers_; }
  std::optional<std::string> loaded() const;

  /// Sleep before answering each infer (models a slow or stalled worker).
  void set_infer_delay(std::chrono::milliseconds d) { infer_delay_ms_ = d.count(); }
  void set_load_delay(std::chrono::milliseconds d) { load_delay_ms_ = d.count(); }
  /// Next infer fails with this message.
  void fail_next_infer(std::string message);

 protected:
  virtual InferOutput respond(const nlohmann::json& body,
                              const std::optional<audio::AudioBuffer>& audio) = 0;
  virtual bool requires_load() const { return true; }

 private:
  Hello hello_;
  std::shared_ptr<EventLog> log_;
  mutable std::mutex mu_;
  std::optional<std::string> loaded_;
  std::string fail_next_;
  std::atomic<int> loads_{0}, unloads_{0}, infers_{0};
  std::atomic<long> infer_delay_ms_{0}, load_delay_ms_{0};
};

class EchoAsr final : public MockHandler {
 public:
  EchoAsr(std::string worker_id, std::vector<std::string> models,
          std::shared_ptr<EventLog> log = nullptr);

 protected:
  InferOutput respond(const nlohmann::json& body,
                      const std::optional<audio::AudioBuffer>& audio) override;
};

class TemplateLlm final : public MockHandler {
 public:
  TemplateLlm(std::string worker_id, std::vector<std::string> models,
              std::shared_ptr<EventLog> log = nullptr);

 protected:
  InferOutput respond(const nlohmann::json& body,
                      const std::optional<audio::AudioBuffer>& audio) override;
};

class ToneTts final : public MockHandler {
 public:
  ToneTts(std::string worker_id, std::vector<std::string> models,
          std::shared_ptr<EventLog> log = nullptr);

 protected:
  InferOutput respond(const nlohmann::json& body,
                      const std::optional<audio::AudioBuffer>& audio) override;
};

class MockE2e final : public MockHandler {
 public:
  MockE2e(std::string worker_id, std::vector<std::string> models,
          std::shared_ptr<EventLog> log = nullptr);

 protected:
  InferOutput respond(const nlohmann::json& body,
                      const std::optional<audio::AudioBuffer>& audio) override;
};

/// Judge serving canned scalar metrics, and `transcript` (echo-ASR text of
/// the request audio) when advertised.
class MockJudge final : public MockHandler {
 public:
  MockJudge(std::string worker_id, std::vector<std::string> metrics,
            std::shared_ptr<EventLog> log = nullptr);

 protected:
  InferOutput respond(const nlohmann::json& body,
                      const std::optional<audio::AudioBuffer>& audio) override;
  bool requires_load() const override { return false; }
};

inline constexpr std::string_view kTranscriptMetric = "transcript";

struct MockSetOptions {
  bool asr = true;
  bool llm = true;
  bool tts = true;
  bool e2e = true;
  bool quality_judge = true;
  bool transcript_judge = true;
};

/// The standard in-process worker set:
///   mock-asr (asr: echo-asr)        mock-llm (llm: template-llm)
///   mock-tts (tts: tone-tts)        mock-e2e (e2e: mock-e2e)
///   mockq (judge: quality and text metrics)
///   mock-asr-judge (judge: transcript)
class MockWorkerSet {
 public:
  explicit MockWorkerSet(WorkerRegistry& registry, MockSetOptions options = {});
  ~MockWorkerSet();

  std::shared_ptr<EventLog> log() const { return log_; }
  MockHandler* handler(const std::string& worker_id) const;
  InProcessWorker* worker(const std::string& worker_id) const;

 private:
  std::shared_ptr<EventLog> log_;
  std::map<std::string, std::shared_ptr<MockHandler>> handlers_;
  std::map<std::string, std::unique_ptr<InProcessWorker>> workers_;
};

std::shared_ptr<MockHandler> make_mock(const std::string& kind, const std::string& worker_id,
                                       std::shared_ptr<EventLog> log = nullptr);

}  // namespace mock
}  // namespace sds::protocol
