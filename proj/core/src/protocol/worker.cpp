// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/protocol/worker.hpp"

#include "sds/error.hpp"
#include "sds/protocol/registry.hpp"

namespace sds::protocol {

nlohmann::json Hello::to_json() const {
  nlohmann::json j = {{"op", op::kHello},
                      {"worker_id", worker_id},
                      {"task", to_string(task)},
                      {"models", models}};
  if (!judge_metrics.empty()) j["judge_metrics"] = judge_metrics;
  return j;
}

Message handle_request(WorkerHandler& handler, const Message& request) {
  Message reply;
  if (const auto id = request.request_id()) reply.header["request_id"] = *id;
  const auto op_name = request.op();
  try {
    if (op_name == op::kPing) {
      reply.header["op"] = op::kPong;
    } else if (op_name == op::kLoad) {
      handler.load(request.header.at("model").get<std::string>());
      reply.header["op"] = op::kOk;
    } else if (op_name == op::kUnload) {
      handler.unload();
      reply.header["op"] = op::kOk;
    } else if (op_name == op::kInfer) {
      auto out = handler.infer(request.header.value("body", nlohmann::json::object()), request.audio);
      reply.header["op"] = op::kResult;
      reply.header["body"] = std::move(out.body);
      reply.audio = std::move(out.audio);
    } else {
      throw Error(Errc::MalformedMessage, "unsupported op '" + op_name + "'");
    }
  } catch (const std::exception& e) {
    reply.header["op"] = op::kError;
    reply.header["message"] = e.what();
    reply.audio.reset();
  }
  return reply;
}

bool serve_worker(Transport& transport, WorkerHandler& handler) {
  MessageStream stream(transport);
  try {
    stream.write(Message{handler.hello().to_json(), std::nullopt});
    auto ack = stream.read();
    if (!ack || ack->op() != op::kHelloAck) return false;
    while (auto request = stream.read()) {
      stream.write(handle_request(handler, *request));
    }
  } catch (const Error&) {
    // Stream closed or a malformed frame: this connection is over.
  }
  return true;
}

InProcessWorker::InProcessWorker(WorkerRegistry& registry, std::shared_ptr<WorkerHandler> handler)
    : handler_(std::move(handler)), worker_id_(handler_->hello().worker_id) {
  auto [harness_end, worker_end] = make_pipe();
  worker_end_ = std::move(worker_end);
  thread_ = std::thread([this] { serve_worker(*worker_end_, *handler_); });
  try {
    registry.attach(std::move(harness_end));
  } catch (...) {
    worker_end_->close();
    thread_.join();
    throw;
  }
}

InProcessWorker::~InProcessWorker() {
  disconnect();
  if (thread_.joinable()) thread_.join();
}

void InProcessWorker::disconnect() { worker_end_->close(); }

}  // namespace sds::protocol
