// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sds::protocol {
class WorkerRegistry;
}

namespace sds::gateway {

struct CatalogModel {
  std::string model_id;
  std::vector<std::string> workers;
  bool loaded = false;
};

struct CatalogJudge {
  std::string worker_id;
  std::vector<std::string> metrics;
};

struct Catalog {
  std::vector<CatalogModel> asr, llm, tts, e2e;
  std::vector<CatalogJudge> judges;

  /// Selectable systems: every ASR x LLM x TTS combination plus each E2E model.
  std::size_t variations() const noexcept;
  bool empty() const noexcept;
};

std::size_t count_variations(std::size_t asr, std::size_t llm, std::size_t tts, std::size_t e2e) noexcept;

/// Models grouped by task; a model advertised by several workers appears once.
Catalog build_catalog(const protocol::WorkerRegistry& registry);

nlohmann::json to_json(const Catalog& c);

}  // namespace sds::gateway
