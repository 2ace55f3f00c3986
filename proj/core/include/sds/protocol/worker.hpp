// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sds/audio.hpp"
#include "sds/protocol/message.hpp"
#include "sds/protocol/transport.hpp"

namespace sds::protocol {

class WorkerRegistry;

struct Hello {
  std::string worker_id;
  Task task = Task::Asr;
  std::vector<std::string> models;
  std::vector<std::string> judge_metrics;

  nlohmann::json to_json() const;
};

struct InferOutput {
  nlohmann::json body = nlohmann::json::object();
  std::optional<audio::AudioBuffer> audio;
};

/// Model-side behaviour behind the wire protocol. Exceptions thrown from
/// any method become `error` responses carrying what().
class WorkerHandler {
 public:
  virtual ~WorkerHandler() = default;

  virtual Hello hello() const = 0;
  virtual void load(const std::string& model_id) = 0;
  virtual void unload() = 0;
  virtual InferOutput infer(const nlohmann::json& body,
                            const std::optional<audio::AudioBuffer>& audio) = 0;
};

/// Answers one request header (load/unload/infer/ping) with a response
/// message that echoes its request_id.
Message handle_request(WorkerHandler& handler, const Message& request);

/// Worker side of the protocol: sends hello, then answers requests in
/// order until the stream ends. Returns false if the harness rejected the
/// hello.
bool serve_worker(Transport& transport, WorkerHandler& handler);

/// A handler served on its own thread over an in-memory pipe.
class InProcessWorker {
 public:
  InProcessWorker(WorkerRegistry& registry, std::shared_ptr<WorkerHandler> handler);
  ~InProcessWorker();
  InProcessWorker(InProcessWorker&&) = delete;

  const std::string& worker_id() const noexcept { return worker_id_; }
  WorkerHandler& handler() noexcept { return *handler_; }
  /// Drops the connection as a crashed worker would.
  void disconnect();

 private:
  std::shared_ptr<WorkerHandler> handler_;
  std::unique_ptr<Transport> worker_end_;
  std::thread thread_;
  std::string worker_id_;
};

}  // namespace sds::protocol
