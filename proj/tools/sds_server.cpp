// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

// Gateway server: HTTP/WebSocket front end plus the worker port.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "sds/gateway/server.hpp"
#include "sds/gateway/session_manager.hpp"
#include "sds/protocol/mock_workers.hpp"
#include "sds/protocol/registry.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spoken dialogue gateway"};
  int http_port = 8080;
  int worker_port = 9090;
  std::string bind = "127.0.0.1";
  std::string storage_root = "sds-data";
  std::string scales_file;
  bool enable_storage = false;
  bool no_audio = false;
  bool mock_workers = false;
  int deadline_ms = 10000;
  int worker_threads = 2;

  if (const char* p = std::getenv("SDS_HTTP_PORT")) http_port = std::atoi(p);
  if (const char* p = std::getenv("SDS_WORKER_PORT")) worker_port = std::atoi(p);

  app.add_option("--http-port", http_port, "HTTP/WebSocket port (env SDS_HTTP_PORT)");
  app.add_option("--worker-port", worker_port, "model worker port (env SDS_WORKER_PORT)");
  app.add_option("--bind", bind, "address for both listeners");
  app.add_flag("--enable-storage", enable_storage, "persist sessions after privacy consent");
  app.add_option("--storage-root", storage_root, "directory for persisted sessions");
  app.add_flag("--no-audio-storage", no_audio, "persist text only");
  app.add_option("--feedback-scales", scales_file, "JSON file overriding the rating labels");
  app.add_flag("--mock-workers", mock_workers, "attach the in-process mock workers");
  app.add_option("--deadline-ms", deadline_ms, "per-request worker deadline");
  app.add_option("--worker-threads", worker_threads, "threads for blocking session work");
  CLI11_PARSE(app, argc, argv);

  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  try {
    using namespace sds;
    protocol::WorkerRegistry registry(std::chrono::milliseconds{deadline_ms});
    std::unique_ptr<protocol::mock::MockWorkerSet> mocks;
    if (mock_workers) mocks = std::make_unique<protocol::mock::MockWorkerSet>(registry);
    protocol::WorkerListener listener(registry, static_cast<std::uint16_t>(worker_port), bind);

    gateway::GatewayOptions options;
    options.storage.enabled = enable_storage;
    options.storage.root_path = storage_root;
    options.storage.store_audio = !no_audio;
    if (!scales_file.empty()) options.scales = gateway::FeedbackScales::from_file(scales_file);
    options.deadline = std::chrono::milliseconds{deadline_ms};
    gateway::SessionManager manager(registry, options);

    gateway::ServerOptions server_options;
    server_options.port = static_cast<std::uint16_t>(http_port);
    server_options.bind_address = bind;
    server_options.worker_threads = worker_threads;
    gateway::GatewayServer server(manager, server_options);

    std::cout << "sds-server: http " << bind << ":" << server.port() << ", workers " << bind << ":"
              << listener.port() << (enable_storage ? ", storage on" : ", storage off") << std::endl;

    int sig = 0;
    sigwait(&stop_signals, &sig);
    std::cout << "sds-server: stopping" << std::endl;
    server.stop();
    listener.stop();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sds-server: " << e.what() << "\n";
    return 2;
  }
}
