// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/gateway/feedback.hpp"

#include <fstream>

#include "sds/error.hpp"

namespace sds::gateway {

std::string_view to_string(Dimension d) noexcept {
  return d == Dimension::Naturalness ? "naturalness" : "relevance";
}

Dimension dimension_from_string(std::string_view s) {
  if (s == "naturalness") return Dimension::Naturalness;
  if (s == "relevance") return Dimension::Relevance;
  throw Error(Errc::InvalidArgument, "unknown feedback dimension '" + std::string(s) + "'");
}

void validate_level(int level) {
  if (level < 1 || level > kLevels) {
    throw Error(Errc::InvalidLevel, "level " + std::to_string(level) + " outside 1.." + std::to_string(kLevels));
  }
}

const LabelSet& FeedbackScales::labels(Dimension d) const noexcept {
  return d == Dimension::Naturalness ? naturalness : relevance;
}

const std::string& FeedbackScales::label(Dimension d, int level) const {
  validate_level(level);
  return labels(d)[static_cast<std::size_t>(level - 1)];
}

FeedbackScales FeedbackScales::from_json(const nlohmann::json& j) {
  FeedbackScales s;
  auto read = [&](const char* key, LabelSet& out) {
    if (!j.contains(key)) return;
    const auto& arr = j[key];
    if (!arr.is_array() || arr.size() != kLevels) {
      throw Error(Errc::InvalidArgument, std::string(key) + " needs exactly 4 labels");
    }
    for (std::size_t i = 0; i < kLevels; ++i) out[i] = arr[i].get<std::string>();
  };
  read("naturalness", s.naturalness);
  read("relevance", s.relevance);
  return s;
}

FeedbackScales FeedbackScales::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

nlohmann::json FeedbackScales::to_json() const {
  return {{"naturalness", naturalness}, {"relevance", relevance}};
}

nlohmann::json to_json(const FeedbackRating& r, const FeedbackScales& scales) {
  return {{"turn_id", r.turn_id},
          {"dimension", to_string(r.dimension)},
          {"level", r.level},
          {"label", scales.label(r.dimension, r.level)},
          {"timestamp", r.timestamp}};
}

std::array<double, kLevels> FeedbackAggregate::percentages() const noexcept {
  std::array<double, kLevels> out{};
  if (total == 0) return out;
  for (std::size_t i = 0; i < kLevels; ++i) {
    out[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return out;
}

FeedbackAggregate aggregate(std::span<const FeedbackRating> ratings, Dimension dimension) {
  FeedbackAggregate a;
  a.dimension = dimension;
  for (const auto& r : ratings) {
    if (r.dimension != dimension) continue;
    validate_level(r.level);
    ++a.counts[static_cast<std::size_t>(r.level - 1)];
    ++a.total;
  }
  return a;
}

}  // namespace sds::gateway
