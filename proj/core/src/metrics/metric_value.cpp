// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/metrics/metric_value.hpp"

#include "sds/error.hpp"

namespace sds::metrics {

namespace {
constexpr std::string_view kJudgePrefix = "judge:";
}

std::string_view to_string(MetricStatus s) noexcept {
  switch (s) {
    case MetricStatus::Ok: return "ok";
    case MetricStatus::Skipped: return "skipped";
    case MetricStatus::Error: return "error";
  }
  return "?";
}

std::string judge_source(const std::string& worker_id) { return std::string(kJudgePrefix) + worker_id; }

MetricValue MetricValue::native(std::string name, double value, std::optional<int> turn) {
  return {std::move(name), value, "native", turn, MetricStatus::Ok, {}};
}

MetricValue MetricValue::judged(std::string name, double value, const std::string& worker_id,
                                std::optional<int> turn) {
  return {std::move(name), value, judge_source(worker_id), turn, MetricStatus::Ok, {}};
}

MetricValue MetricValue::skipped(std::string name, std::string reason, std::optional<int> turn) {
  return {std::move(name), std::nullopt, "native", turn, MetricStatus::Skipped, std::move(reason)};
}

MetricValue MetricValue::failed(std::string name, std::string source, std::string reason,
                                std::optional<int> turn) {
  return {std::move(name), std::nullopt, std::move(source), turn, MetricStatus::Error, std::move(reason)};
}

std::string MetricValue::judge_id() const {
  if (source.rfind(kJudgePrefix, 0) != 0) return {};
  return source.substr(kJudgePrefix.size());
}

void to_json(nlohmann::json& j, const MetricValue& m) {
  j = nlohmann::json{{"name", m.name}, {"source", m.source}, {"status", to_string(m.status)}};
  j["value"] = m.value ? nlohmann::json(*m.value) : nlohmann::json(nullptr);
  if (m.turn_id) j["turn_id"] = *m.turn_id;
  if (!m.detail.empty()) j["detail"] = m.detail;
}

void from_json(const nlohmann::json& j, MetricValue& m) {
  m.name = j.at("name").get<std::string>();
  m.source = j.value("source", std::string("native"));
  const auto status = j.value("status", std::string("ok"));
  if (status == "ok") {
    m.status = MetricStatus::Ok;
  } else if (status == "skipped") {
    m.status = MetricStatus::Skipped;
  } else if (status == "error") {
    m.status = MetricStatus::Error;
  } else {
    throw Error(Errc::ParseError, "unknown metric status '" + status + "'");
  }
  m.value = j.contains("value") && !j["value"].is_null() ? std::optional(j["value"].get<double>())
                                                         : std::nullopt;
  m.turn_id = j.contains("turn_id") ? std::optional(j["turn_id"].get<int>()) : std::nullopt;
  m.detail = j.value("detail", std::string());
}

}  // namespace sds::metrics
