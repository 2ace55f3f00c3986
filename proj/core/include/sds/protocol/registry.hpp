// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sds/audio.hpp"
#include "sds/protocol/connection.hpp"
#include "sds/protocol/message.hpp"

namespace sds::protocol {

struct WorkerDescriptor {
  std::string worker_id;
  Task task = Task::Asr;
  std::vector<std::string> models;
  std::vector<std::string> judge_metrics;
  std::optional<std::string> loaded_model;
};

/// Validates a hello header. Throws Errc::MalformedHello or
/// Errc::EmptyModelList (no models, or a judge without metrics).
WorkerDescriptor parse_hello(const nlohmann::json& hello);

struct InferReply {
  nlohmann::json body;
  std::optional<audio::AudioBuffer> audio;
  double latency_ms = 0.0;
  std::string worker_id;
};

/// Registered workers, their connections, and the per-task loaded-model
/// slots. At most one worker per task holds a loaded model.
///
/// Descriptor reads take a shared lock; registration and slot changes are
/// exclusive. Requests to one worker are serialized by its connection, so
/// dispatches to distinct workers proceed concurrently.
class WorkerRegistry {
 public:
  explicit WorkerRegistry(std::chrono::milliseconds default_deadline = std::chrono::seconds(10));
  ~WorkerRegistry();
  WorkerRegistry(const WorkerRegistry&) = delete;
  WorkerRegistry& operator=(const WorkerRegistry&) = delete;

  /// Reads the worker's hello, registers it and acknowledges. A duplicate
  /// worker_id supersedes the earlier registration and closes its connection.
  WorkerDescriptor attach(std::unique_ptr<Transport> transport,
                          std::chrono::milliseconds hello_timeout = std::chrono::seconds(5));

  /// Loads `model_id` on the worker, first unloading whichever worker of the
  /// same task holds a model. Loading the already-loaded model is a no-op.
  void load_model(const std::string& worker_id, const std::string& model_id,
                  std::optional<std::chrono::milliseconds> deadline = {});
  void unload_model(const std::string& worker_id,
                    std::optional<std::chrono::milliseconds> deadline = {});
  /// Loads `model_id` on a worker of `task` that advertises it.
  std::string select_model(Task task, const std::string& model_id,
                           std::optional<std::chrono::milliseconds> deadline = {});

  /// Dispatches to the worker holding the loaded model for `task`.
  InferReply dispatch_infer(Task task, const nlohmann::json& body,
                            const std::optional<audio::AudioBuffer>& audio,
                            std::optional<std::chrono::milliseconds> deadline = {});
  InferReply dispatch_to(const std::string& worker_id, const nlohmann::json& body,
                         const std::optional<audio::AudioBuffer>& audio,
                         std::optional<std::chrono::milliseconds> deadline = {});
  double ping(const std::string& worker_id, std::optional<std::chrono::milliseconds> deadline = {});

  std::vector<WorkerDescriptor> workers() const;
  std::optional<WorkerDescriptor> find(const std::string& worker_id) const;
  std::optional<WorkerDescriptor> loaded_for(Task task) const;
  /// Judge workers advertising `metric`, in worker_id order.
  std::vector<std::string> judges_for(std::string_view metric) const;
  /// Every (worker, model) pair for a task, in worker_id order.
  std::vector<std::pair<std::string, std::string>> models_for(Task task) const;
  std::size_t size() const;

  /// Violations of the one-loaded-model-per-task invariant (empty when sound).
  std::vector<std::string> audit() const;

  /// Blocks until at least `count` workers are registered.
  bool wait_for_workers(std::size_t count, std::chrono::milliseconds timeout) const;

  std::chrono::milliseconds default_deadline() const noexcept { return default_deadline_; }

 private:
  struct Entry {
    WorkerDescriptor descriptor;
    std::shared_ptr<WorkerConnection> connection;
  };

  std::shared_ptr<WorkerConnection> connection_for(const std::string& worker_id) const;
  void on_connection_closed(const WorkerConnection* connection);
  // Joins connections whose reader thread has ended; never called on a
  // reader thread.
  void reap();
  void set_loaded(const std::string& worker_id, std::optional<std::string> model);
  void unload_locked_out(const std::string& worker_id, std::chrono::milliseconds deadline);
  std::chrono::milliseconds resolve(std::optional<std::chrono::milliseconds> d) const {
    return d.value_or(default_deadline_);
  }

  std::chrono::milliseconds default_deadline_;
  mutable std::shared_mutex mu_;
  mutable std::condition_variable_any changed_;
  std::map<std::string, Entry> entries_;
  // Serializes slot changes (load/unload sequences).
  std::mutex slot_mu_;
  std::mutex grave_mu_;
  std::vector<std::shared_ptr<WorkerConnection>> grave_;
};

/// Accepts worker connections on a TCP port and attaches them.
class WorkerListener {
 public:
  WorkerListener(WorkerRegistry& registry, std::uint16_t port,
                 const std::string& bind_address = "127.0.0.1");
  ~WorkerListener();

  std::uint16_t port() const noexcept { return listener_.port(); }
  void stop();

 private:
  void accept_loop();

  WorkerRegistry& registry_;
  TcpListener listener_;
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<std::thread> attachers_;
};

}  // namespace sds::protocol
