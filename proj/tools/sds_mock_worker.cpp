// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

// A mock model worker that connects to a harness over TCP.

#include <iostream>

#include <CLI11.hpp>

#include "sds/protocol/mock_workers.hpp"
#include "sds/protocol/transport.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mock model worker"};
  std::string kind;
  std::string id;
  std::string host = "127.0.0.1";
  int port = 9090;
  app.add_option("--kind", kind, "asr, llm, tts, e2e, judge or asr-judge")
      ->required()
      ->check(CLI::IsMember({"asr", "llm", "tts", "e2e", "judge", "asr-judge"}));
  app.add_option("--id", id, "worker id (default: mock-<kind>)");
  app.add_option("--host", host);
  app.add_option("--port", port, "harness worker port");
  CLI11_PARSE(app, argc, argv);
  if (id.empty()) id = "mock-" + kind;

  try {
    auto handler = sds::protocol::mock::make_mock(kind, id);
    auto transport = sds::protocol::tcp_connect(host, static_cast<std::uint16_t>(port));
    if (!sds::protocol::serve_worker(*transport, *handler)) {
      std::cerr << "sds-mock-worker: hello rejected\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sds-mock-worker: " << e.what() << "\n";
    return 2;
  }
}
