// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sds::gateway {

enum class Dimension { Naturalness, Relevance };

std::string_view to_string(Dimension d) noexcept;
/// Throws Errc::InvalidArgument.
Dimension dimension_from_string(std::string_view s);

inline constexpr int kLevels = 4;

using LabelSet = std::array<std::string, kLevels>;

/// Level labels per dimension, best first.
struct FeedbackScales {
  LabelSet naturalness{"Very Natural", "Somewhat Awkward", "Unnatural", "Very Awkward"};
  LabelSet relevance{"Highly Relevant", "Partially Relevant", "Slightly Irrelevant",
                     "Completely Irrelevant"};

  const LabelSet& labels(Dimension d) const noexcept;
  /// Throws Errc::InvalidLevel outside 1..4.
  const std::string& label(Dimension d, int level) const;

  /// {"naturalness": [4 labels], "relevance": [4 labels]}; either key may be
  /// omitted to keep the default.
  static FeedbackScales from_json(const nlohmann::json& j);
  static FeedbackScales from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct FeedbackRating {
  int turn_id = 0;
  Dimension dimension = Dimension::Naturalness;
  int level = 1;
  // Seconds since the epoch.
  double timestamp = 0.0;
};

/// Throws Errc::InvalidLevel outside 1..4.
void validate_level(int level);

nlohmann::json to_json(const FeedbackRating& r, const FeedbackScales& scales = {});

struct FeedbackAggregate {
  Dimension dimension = Dimension::Naturalness;
  std::array<std::size_t, kLevels> counts{};
  std::size_t total = 0;

  /// Share of each level in percent (zeros when empty).
  std::array<double, kLevels> percentages() const noexcept;
};

FeedbackAggregate aggregate(std::span<const FeedbackRating> ratings, Dimension dimension);

}  // namespace sds::gateway
