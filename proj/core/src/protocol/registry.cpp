// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/protocol/registry.hpp"

#include <algorithm>

#include "sds/error.hpp"

namespace sds::protocol {
namespace {

std::vector<std::string> string_list(const nlohmann::json& hello, const char* key) {
  std::vector<std::string> out;
  const auto it = hello.find(key);
  if (it == hello.end() || it->is_null()) return out;
  if (!it->is_array()) throw Error(Errc::MalformedHello, std::string(key) + " must be a list");
  for (const auto& v : *it) {
    if (!v.is_string() || v.get<std::string>().empty()) {
      throw Error(Errc::MalformedHello, std::string(key) + " entries must be non-empty strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

WorkerDescriptor parse_hello(const nlohmann::json& hello) {
  if (!hello.is_object()) throw Error(Errc::MalformedHello, "hello must be an object");
  if (hello.value("op", std::string()) != op::kHello) {
    throw Error(Errc::MalformedHello, "first message must be op=hello");
  }
  WorkerDescriptor d;
  const auto id = hello.find("worker_id");
  if (id == hello.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw Error(Errc::MalformedHello, "missing worker_id");
  }
  d.worker_id = id->get<std::string>();
  const auto task = hello.find("task");
  if (task == hello.end() || !task->is_string()) throw Error(Errc::MalformedHello, "missing task");
  try {
    d.task = task_from_string(task->get<std::string>());
  } catch (const Error& e) {
    throw Error(Errc::MalformedHello, e.what());
  }
  d.models = string_list(hello, "models");
  d.judge_metrics = string_list(hello, "judge_metrics");
  if (d.models.empty()) throw Error(Errc::EmptyModelList, "worker advertises no models");
  if (d.task == Task::Judge && d.judge_metrics.empty()) {
    throw Error(Errc::EmptyModelList, "judge worker must list judge_metrics");
  }
  if (d.task != Task::Judge && !d.judge_metrics.empty()) {
    throw Error(Errc::MalformedHello, "judge_metrics is only valid for judge workers");
  }
  return d;
}

WorkerRegistry::WorkerRegistry(std::chrono::milliseconds default_deadline)
    : default_deadline_(default_deadline) {}

WorkerRegistry::~WorkerRegistry() {
  std::map<std::string, Entry> entries;
  {
    std::unique_lock lock(mu_);
    entries.swap(entries_);
  }
  for (auto& [id, e] : entries) e.connection->close();
  entries.clear();
  reap();
}

WorkerDescriptor WorkerRegistry::attach(std::unique_ptr<Transport> transport,
                                        std::chrono::milliseconds hello_timeout) {
  reap();
  auto conn = std::make_shared<WorkerConnection>(std::move(transport));
  auto hello_future = conn->start([this, raw = conn.get()] { on_connection_closed(raw); });
  if (hello_future.wait_for(hello_timeout) != std::future_status::ready) {
    conn->close();
    throw Error(Errc::MalformedHello, "no hello within timeout");
  }
  WorkerDescriptor descriptor;
  try {
    descriptor = parse_hello(hello_future.get().header);
  } catch (const Error& e) {
    try {
      conn->post(Message{{{"op", op::kError}, {"code", to_string(e.code())}, {"message", e.what()}}, {}});
    } catch (...) {
    }
    conn->close();
    throw;
  } catch (const std::exception& e) {
    conn->close();
    throw Error(Errc::MalformedHello, e.what());
  }

  // Acknowledge before publishing: once visible, callers may send requests,
  // and the worker expects the ack first.
  conn->post(Message{{{"op", op::kHelloAck}, {"worker_id", descriptor.worker_id}}, {}});

  std::shared_ptr<WorkerConnection> superseded;
  {
    std::unique_lock lock(mu_);
    auto& slot = entries_[descriptor.worker_id];
    superseded = std::move(slot.connection);
    slot.descriptor = descriptor;
    slot.connection = conn;
  }
  changed_.notify_all();
  if (superseded) superseded->close();
  superseded.reset();
  return descriptor;
}

void WorkerRegistry::on_connection_closed(const WorkerConnection* connection) {
  std::shared_ptr<WorkerConnection> dead;
  {
    std::unique_lock lock(mu_);
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (it->second.connection.get() == connection) {
        dead = std::move(it->second.connection);
        entries_.erase(it);
        break;
      }
    }
  }
  changed_.notify_all();
  if (dead) {
    std::lock_guard lock(grave_mu_);
    grave_.push_back(std::move(dead));
  }
}

void WorkerRegistry::reap() {
  std::vector<std::shared_ptr<WorkerConnection>> dead;
  {
    std::lock_guard lock(grave_mu_);
    dead.swap(grave_);
  }
}

std::shared_ptr<WorkerConnection> WorkerRegistry::connection_for(const std::string& worker_id) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(worker_id);
  if (it == entries_.end()) throw Error(Errc::UnknownWorker, worker_id);
  return it->second.connection;
}

void WorkerRegistry::set_loaded(const std::string& worker_id, std::optional<std::string> model) {
  std::unique_lock lock(mu_);
  if (auto it = entries_.find(worker_id); it != entries_.end()) {
    it->second.descriptor.loaded_model = std::move(model);
  }
}

void WorkerRegistry::unload_locked_out(const std::string& worker_id,
                                       std::chrono::milliseconds deadline) {
  auto conn = connection_for(worker_id);
  conn->call({{"op", op::kUnload}}, std::nullopt, deadline);
  set_loaded(worker_id, std::nullopt);
}

void WorkerRegistry::load_model(const std::string& worker_id, const std::string& model_id,
                                std::optional<std::chrono::milliseconds> deadline) {
  std::lock_guard slot_lock(slot_mu_);
  const auto target = find(worker_id);
  if (!target) throw Error(Errc::UnknownWorker, worker_id);
  if (std::find(target->models.begin(), target->models.end(), model_id) == target->models.end()) {
    throw Error(Errc::UnknownModel, model_id + " is not served by " + worker_id);
  }
  if (target->loaded_model == model_id) return;

  for (const auto& w : workers()) {
    if (w.task == target->task && w.loaded_model && w.worker_id != worker_id) {
      unload_locked_out(w.worker_id, resolve(deadline));
    }
  }
  if (target->loaded_model) unload_locked_out(worker_id, resolve(deadline));
  auto conn = connection_for(worker_id);
  conn->call({{"op", op::kLoad}, {"model", model_id}}, std::nullopt, resolve(deadline));
  set_loaded(worker_id, model_id);
}

void WorkerRegistry::unload_model(const std::string& worker_id,
                                  std::optional<std::chrono::milliseconds> deadline) {
  std::lock_guard slot_lock(slot_mu_);
  if (!find(worker_id)) throw Error(Errc::UnknownWorker, worker_id);
  unload_locked_out(worker_id, resolve(deadline));
}

std::string WorkerRegistry::select_model(Task task, const std::string& model_id,
                                         std::optional<std::chrono::milliseconds> deadline) {
  std::optional<std::string> chosen;
  bool any_for_task = false;
  for (const auto& w : workers()) {
    if (w.task != task) continue;
    any_for_task = true;
    if (std::find(w.models.begin(), w.models.end(), model_id) == w.models.end()) continue;
    if (w.loaded_model == model_id) {
      chosen = w.worker_id;
      break;
    }
    if (!chosen) chosen = w.worker_id;
  }
  if (!any_for_task) {
    throw Error(Errc::NoWorkerForTask, std::string("no ") + std::string(to_string(task)) + " worker");
  }
  if (!chosen) throw Error(Errc::UnknownModel, model_id);
  load_model(*chosen, model_id, deadline);
  return *chosen;
}

InferReply WorkerRegistry::dispatch_infer(Task task, const nlohmann::json& body,
                                          const std::optional<audio::AudioBuffer>& audio,
                                          std::optional<std::chrono::milliseconds> deadline) {
  const auto worker = loaded_for(task);
  if (!worker) {
    throw Error(Errc::NoWorkerForTask,
                std::string("no ") + std::string(to_string(task)) + " worker with a loaded model");
  }
  return dispatch_to(worker->worker_id, body, audio, deadline);
}

InferReply WorkerRegistry::dispatch_to(const std::string& worker_id, const nlohmann::json& body,
                                       const std::optional<audio::AudioBuffer>& audio,
                                       std::optional<std::chrono::milliseconds> deadline) {
  auto conn = connection_for(worker_id);
  const auto reply = conn->call({{"op", op::kInfer}, {"body", body}}, audio, resolve(deadline));
  if (reply.message.op() != op::kResult) {
    throw Error(Errc::WorkerError, "unexpected reply op '" + reply.message.op() + "'");
  }
  InferReply out;
  out.body = reply.message.header.value("body", nlohmann::json::object());
  out.audio = reply.message.audio;
  out.latency_ms = reply.latency_ms;
  out.worker_id = worker_id;
  return out;
}

double WorkerRegistry::ping(const std::string& worker_id,
                            std::optional<std::chrono::milliseconds> deadline) {
  auto conn = connection_for(worker_id);
  const auto reply = conn->call({{"op", op::kPing}}, std::nullopt, resolve(deadline));
  if (reply.message.op() != op::kPong) throw Error(Errc::WorkerError, "expected pong");
  return reply.latency_ms;
}

std::vector<WorkerDescriptor> WorkerRegistry::workers() const {
  std::shared_lock lock(mu_);
  std::vector<WorkerDescriptor> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back(e.descriptor);
  return out;
}

std::optional<WorkerDescriptor> WorkerRegistry::find(const std::string& worker_id) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(worker_id);
  if (it == entries_.end()) return std::nullopt;
  return it->second.descriptor;
}

std::optional<WorkerDescriptor> WorkerRegistry::loaded_for(Task task) const {
  std::shared_lock lock(mu_);
  for (const auto& [id, e] : entries_) {
    if (e.descriptor.task == task && e.descriptor.loaded_model) return e.descriptor;
  }
  return std::nullopt;
}

std::vector<std::string> WorkerRegistry::judges_for(std::string_view metric) const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, e] : entries_) {
    const auto& m = e.descriptor.judge_metrics;
    if (e.descriptor.task == Task::Judge && std::find(m.begin(), m.end(), metric) != m.end()) {
      out.push_back(id);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> WorkerRegistry::models_for(Task task) const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [id, e] : entries_) {
    if (e.descriptor.task != task) continue;
    for (const auto& m : e.descriptor.models) out.emplace_back(id, m);
  }
  return out;
}

std::size_t WorkerRegistry::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<std::string> WorkerRegistry::audit() const {
  std::shared_lock lock(mu_);
  std::map<Task, std::vector<std::string>> loaded;
  std::vector<std::string> violations;
  for (const auto& [id, e] : entries_) {
    const auto& d = e.descriptor;
    if (!d.loaded_model) continue;
    loaded[d.task].push_back(id);
    if (std::find(d.models.begin(), d.models.end(), *d.loaded_model) == d.models.end()) {
      violations.push_back(id + " has unadvertised model " + *d.loaded_model + " loaded");
    }
  }
  for (const auto& [task, ids] : loaded) {
    if (ids.size() > 1) {
      std::string joined;
      for (const auto& id : ids) joined += (joined.empty() ? "" : ", ") + id;
      violations.push_back(std::string(to_string(task)) + " has " + std::to_string(ids.size()) +
                           " loaded workers: " + joined);
    }
  }
  return violations;
}

bool WorkerRegistry::wait_for_workers(std::size_t count, std::chrono::milliseconds timeout) const {
  std::shared_lock lock(mu_);
  return changed_.wait_for(lock, timeout, [&] { return entries_.size() >= count; });
}

WorkerListener::WorkerListener(WorkerRegistry& registry, std::uint16_t port,
                               const std::string& bind_address)
    : registry_(registry), listener_(port, bind_address) {
  acceptor_ = std::thread([this] { accept_loop(); });
}

WorkerListener::~WorkerListener() { stop(); }

void WorkerListener::stop() {
  listener_.close();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> pending;
  {
    std::lock_guard lock(mu_);
    pending.swap(attachers_);
  }
  for (auto& t : pending) t.join();
}

void WorkerListener::accept_loop() {
  while (auto transport = listener_.accept()) {
    std::lock_guard lock(mu_);
    attachers_.emplace_back([this, t = std::move(transport)]() mutable {
      try {
        registry_.attach(std::move(t));
      } catch (const std::exception&) {
        // Rejected hellos are reported to the worker; nothing to do here.
      }
    });
  }
}

}  // namespace sds::protocol
