// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/eval/report.hpp"

#include <algorithm>
#include <cstdio>

#include "sds/error.hpp"

namespace sds::eval {

void Table::set(const std::string& row, const std::string& column, Cell c) {
  if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
  if (std::find(columns.begin(), columns.end(), column) == columns.end()) columns.push_back(column);
  cells[row][column] = std::move(c);
}

const Cell* Table::get(const std::string& row, const std::string& column) const {
  const auto r = cells.find(row);
  if (r == cells.end()) return nullptr;
  const auto c = r->second.find(column);
  return c == r->second.end() ? nullptr : &c->second;
}

Table* EvalReport::find(const std::string& name) {
  for (auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const Table* EvalReport::find(const std::string& name) const {
  return const_cast<EvalReport*>(this)->find(name);
}

void EvalReport::merge(EvalReport other) {
  for (auto& t : other.tables) tables.push_back(std::move(t));
  for (auto& n : other.notes) {
    if (std::find(notes.begin(), notes.end(), n) == notes.end()) notes.push_back(std::move(n));
  }
  utterance_errors += other.utterance_errors;
}

std::string digest(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string format_cell(const Cell* c) {
  if (!c) return "-";
  if (!c->value) return c->marker;
  char buf[64];
  std::snprintf(buf, sizeof(buf), c->integral ? "%.0f" : "%.2f", *c->value);
  return buf;
}

std::string render_text(const EvalReport& r) {
  std::string out;
  out += "corpus: " + r.provenance.corpus + "\n";
  out += "config: " + r.provenance.config_digest + "\n";
  out += "version: " + r.provenance.tool_version + "\n";
  out += "utterance errors: " + std::to_string(r.utterance_errors) + "\n";
  for (const auto& t : r.tables) {
    out += "\n== " + t.title + " ==\n";
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{""};
    header.insert(header.end(), t.columns.begin(), t.columns.end());
    grid.push_back(header);
    for (const auto& row : t.rows) {
      std::vector<std::string> line{row};
      for (const auto& col : t.columns) line.push_back(format_cell(t.get(row, col)));
      grid.push_back(std::move(line));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : grid) {
      for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    }
    for (const auto& line : grid) {
      std::string text;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (i) text += " | ";
        const auto pad = width[i] - line[i].size();
        text += i == 0 ? line[i] + std::string(pad, ' ') : std::string(pad, ' ') + line[i];
      }
      while (!text.empty() && text.back() == ' ') text.pop_back();
      out += text + "\n";
    }
  }
  if (!r.notes.empty()) {
    out += "\nnotes:\n";
    for (const auto& n : r.notes) out += "  " + n + "\n";
  }
  return out;
}

nlohmann::json cell_json(const Cell& c) {
  if (!c.value) return c.marker;
  if (c.integral) return static_cast<std::int64_t>(*c.value);
  return *c.value;
}

Cell cell_from(const nlohmann::json& j) {
  if (j.is_number_integer()) return Cell{j.get<double>(), {}, true};
  if (j.is_number()) return Cell::of(j.get<double>());
  return Cell::mark(j.get<std::string>());
}

}  // namespace

std::string render_report(const EvalReport& r, Format format) {
  if (format == Format::Text) return render_text(r);
  nlohmann::ordered_json j;
  j["provenance"] = {{"corpus", r.provenance.corpus},
                     {"config_digest", r.provenance.config_digest},
                     {"tool_version", r.provenance.tool_version}};
  j["utterance_errors"] = r.utterance_errors;
  auto tables = nlohmann::ordered_json::array();
  for (const auto& t : r.tables) {
    nlohmann::ordered_json tj;
    tj["name"] = t.name;
    tj["title"] = t.title;
    tj["columns"] = t.columns;
    tj["rows"] = t.rows;
    auto cells = nlohmann::ordered_json::object();
    for (const auto& row : t.rows) {
      auto rj = nlohmann::ordered_json::object();
      for (const auto& col : t.columns) {
        if (const auto* c = t.get(row, col)) rj[col] = cell_json(*c);
      }
      cells[row] = std::move(rj);
    }
    tj["cells"] = std::move(cells);
    tables.push_back(std::move(tj));
  }
  j["tables"] = std::move(tables);
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

EvalReport parse_report_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.provenance.corpus = j.at("provenance").at("corpus").get<std::string>();
    r.provenance.config_digest = j.at("provenance").at("config_digest").get<std::string>();
    r.provenance.tool_version = j.at("provenance").at("tool_version").get<std::string>();
    r.utterance_errors = j.at("utterance_errors").get<std::size_t>();
    for (const auto& tj : j.at("tables")) {
      Table t;
      t.name = tj.at("name").get<std::string>();
      t.title = tj.at("title").get<std::string>();
      t.columns = tj.at("columns").get<std::vector<std::string>>();
      t.rows = tj.at("rows").get<std::vector<std::string>>();
      for (const auto& [row, cols] : tj.at("cells").items()) {
        for (const auto& [col, cj] : cols.items()) t.cells[row][col] = cell_from(cj);
      }
      r.tables.push_back(std::move(t));
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("report: ") + e.what());
  }
}

}  // namespace sds::eval
