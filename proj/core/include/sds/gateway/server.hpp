// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "sds/gateway/session_manager.hpp"

namespace sds::gateway {

struct ServerOptions {
  // 0 picks a free port.
  std::uint16_t port = 0;
  std::string bind_address = "127.0.0.1";
  int io_threads = 1;
  // Threads for blocking work: model loading, turn ingestion, persistence.
  int worker_threads = 2;
};

/// HTTP and WebSocket front end:
///   GET  /healthz                 liveness and counts
///   GET  /models                  catalog of registered models
///   POST /sessions                body: pipeline config; creates a session
///   GET  /sessions/<id>/metrics   turns, metrics and feedback summary
///   WS   /ws/session?id=<id>      conversation stream
class GatewayServer {
 public:
  GatewayServer(SessionManager& manager, ServerOptions options = {});
  ~GatewayServer();
  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  std::uint16_t port() const noexcept;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct HttpResult {
  int status = 200;
  nlohmann::json body;
};

/// Routing for the REST endpoints, shared by the server and tests.
HttpResult handle_rest(SessionManager& manager, const std::string& method, const std::string& target,
                       const std::string& body);

/// Value of `key` in the query string of `target`, if present.
std::optional<std::string> query_param(std::string_view target, std::string_view key);

}  // namespace sds::gateway
