// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sds::eval {

/// A number, or a marker such as "skipped" or "error".
struct Cell {
  std::optional<double> value;
  std::string marker;
  // Counts render without decimals.
  bool integral = false;

  static Cell of(double v) { return {v, {}, false}; }
  static Cell count(std::size_t n) { return {static_cast<double>(n), {}, true}; }
  static Cell mark(std::string m) { return {std::nullopt, std::move(m), false}; }

  friend bool operator==(const Cell&, const Cell&) = default;
};

inline const std::string kSkipped = "skipped";

struct Table {
  std::string name;
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  // row -> column -> cell; missing cells render as "-".
  std::map<std::string, std::map<std::string, Cell>> cells;

  void set(const std::string& row, const std::string& column, Cell c);
  const Cell* get(const std::string& row, const std::string& column) const;

  friend bool operator==(const Table&, const Table&) = default;
};

struct Provenance {
  std::string corpus;
  std::string config_digest;
  std::string tool_version;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct EvalReport {
  Provenance provenance;
  std::vector<Table> tables;
  std::vector<std::string> notes;
  // Utterance-level failures (worker errors, missing audio).
  std::size_t utterance_errors = 0;

  Table* find(const std::string& name);
  const Table* find(const std::string& name) const;
  /// Appends tables and counts; notes already present are not repeated.
  void merge(EvalReport other);

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

enum class Format { Text, Json };

/// Deterministic for a given report. The JSON form parses back to an
/// identical report.
std::string render_report(const EvalReport& report, Format format);
EvalReport parse_report_json(const std::string& text);

/// Stable hex digest (64-bit FNV-1a) for provenance.
std::string digest(const std::string& text);

}  // namespace sds::eval
