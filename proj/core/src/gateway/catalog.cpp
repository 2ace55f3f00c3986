// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/gateway/catalog.hpp"

#include <map>

#include "sds/protocol/registry.hpp"

namespace sds::gateway {

std::size_t count_variations(std::size_t asr, std::size_t llm, std::size_t tts, std::size_t e2e) noexcept {
  return asr * llm * tts + e2e;
}

std::size_t Catalog::variations() const noexcept {
  return count_variations(asr.size(), llm.size(), tts.size(), e2e.size());
}

bool Catalog::empty() const noexcept {
  return asr.empty() && llm.empty() && tts.empty() && e2e.empty() && judges.empty();
}

Catalog build_catalog(const protocol::WorkerRegistry& registry) {
  using protocol::Task;
  std::map<Task, std::map<std::string, CatalogModel>> grouped;
  Catalog out;
  for (const auto& w : registry.workers()) {
    if (w.task == Task::Judge) {
      out.judges.push_back({w.worker_id, w.judge_metrics});
      continue;
    }
    for (const auto& m : w.models) {
      auto& entry = grouped[w.task][m];
      entry.model_id = m;
      entry.workers.push_back(w.worker_id);
      entry.loaded = entry.loaded || w.loaded_model == m;
    }
  }
  auto flatten = [&](Task t) {
    std::vector<CatalogModel> v;
    for (auto& [id, m] : grouped[t]) v.push_back(std::move(m));
    return v;
  };
  out.asr = flatten(Task::Asr);
  out.llm = flatten(Task::Llm);
  out.tts = flatten(Task::Tts);
  out.e2e = flatten(Task::E2e);
  return out;
}

nlohmann::json to_json(const Catalog& c) {
  auto models = [](const std::vector<CatalogModel>& v) {
    auto arr = nlohmann::json::array();
    for (const auto& m : v) arr.push_back({{"model_id", m.model_id}, {"workers", m.workers}, {"loaded", m.loaded}});
    return arr;
  };
  auto judges = nlohmann::json::array();
  for (const auto& j : c.judges) judges.push_back({{"worker_id", j.worker_id}, {"metrics", j.metrics}});
  return {{"asr", models(c.asr)},     {"llm", models(c.llm)}, {"tts", models(c.tts)},
          {"e2e", models(c.e2e)},     {"judges", judges},     {"variations", c.variations()}};
}

}  // namespace sds::gateway
