// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sds/metrics/text.hpp"

namespace sds::metrics {

struct AlignmentCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t matches = 0;
  std::size_t ref_len = 0;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }

  AlignmentCounts& operator+=(const AlignmentCounts& o) noexcept {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    matches += o.matches;
    ref_len += o.ref_len;
    return *this;
  }
  friend bool operator==(const AlignmentCounts&, const AlignmentCounts&) = default;
};

namespace detail {

struct Cell {
  std::size_t cost = 0;
  std::size_t matches = 0;
};

// Lower cost wins; among equal cost, more matches.
inline bool better(const Cell& a, const Cell& b) noexcept {
  return a.cost < b.cost || (a.cost == b.cost && a.matches > b.matches);
}

AlignmentCounts counts_from(std::size_t ref_len, std::size_t hyp_len, const Cell& end) noexcept;

}  // namespace detail

/// Minimum unit-cost edit alignment. Among minimum-cost alignments the one
/// with the most matches is chosen, which fixes S, D and I uniquely (the
/// match > substitution > deletion > insertion preference).
template <class T>
AlignmentCounts align_sequences(std::span<const T> ref, std::span<const T> hyp) {
  using detail::Cell;
  std::vector<Cell> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = {j, 0};
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = {i, 0};
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const bool same = ref[i - 1] == hyp[j - 1];
      Cell best{prev[j - 1].cost + (same ? 0 : 1), prev[j - 1].matches + (same ? 1 : 0)};
      const Cell del{prev[j].cost + 1, prev[j].matches};
      if (detail::better(del, best)) best = del;
      const Cell ins{cur[j - 1].cost + 1, cur[j - 1].matches};
      if (detail::better(ins, best)) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return detail::counts_from(ref.size(), hyp.size(), prev[hyp.size()]);
}

AlignmentCounts align(const TokenSequence& ref, const TokenSequence& hyp);
AlignmentCounts align_chars(std::u32string_view ref, std::u32string_view hyp);

/// (S + D + I) / ref_len. Throws Errc::EmptyReference when ref_len is 0.
double error_rate(const AlignmentCounts& counts);

double wer(const TokenSequence& ref, const TokenSequence& hyp);
double cer(const TokenSequence& ref, const TokenSequence& hyp);

/// Normalize both sides with normalize_text, then score.
double wer(std::string_view ref_text, std::string_view hyp_text);
double cer(std::string_view ref_text, std::string_view hyp_text);

}  // namespace sds::metrics
