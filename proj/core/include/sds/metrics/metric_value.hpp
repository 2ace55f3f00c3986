// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace sds::metrics {

enum class MetricStatus { Ok, Skipped, Error };

std::string_view to_string(MetricStatus s) noexcept;

struct MetricValue {
  std::string name;
  std::optional<double> value;
  // "native" or "judge:<worker_id>".
  std::string source = "native";
  // Absent for conversation-scope values.
  std::optional<int> turn_id;
  MetricStatus status = MetricStatus::Ok;
  // Reason for a skip or error.
  std::string detail;

  static MetricValue native(std::string name, double value, std::optional<int> turn = {});
  static MetricValue judged(std::string name, double value, const std::string& worker_id,
                            std::optional<int> turn = {});
  static MetricValue skipped(std::string name, std::string reason, std::optional<int> turn = {});
  static MetricValue failed(std::string name, std::string source, std::string reason,
                            std::optional<int> turn = {});

  bool ok() const noexcept { return status == MetricStatus::Ok; }
  /// Worker id for judge-sourced values, empty otherwise.
  std::string judge_id() const;

  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

std::string judge_source(const std::string& worker_id);

void to_json(nlohmann::json& j, const MetricValue& m);
void from_json(const nlohmann::json& j, MetricValue& m);

}  // namespace sds::metrics
