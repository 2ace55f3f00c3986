// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sds/metrics/text.hpp"

namespace sds::metrics {

struct SpokenTurn {
  std::size_t word_count = 0;
  double speech_duration_s = 0.0;
};

/// Words per minute of active speech. Throws Errc::ZeroDuration when the
/// summed duration is not positive.
double speaking_rate(std::span<const SpokenTurn> turns);

/// One- and two-word backchannel phrases, stored normalized.
class BackchannelLexicon {
 public:
  BackchannelLexicon() = default;
  /// Each phrase is normalized; throws Errc::InvalidArgument unless it has
  /// one or two tokens.
  explicit BackchannelLexicon(const std::vector<std::string>& phrases);

  static const BackchannelLexicon& default_lexicon();
  /// One phrase per line, UTF-8. Blank lines and lines starting with '#'
  /// are skipped.
  static BackchannelLexicon from_file(const std::filesystem::path& path);

  bool contains(const TokenSequence& phrase) const { return phrases_.count(phrase.tokens) > 0; }
  std::size_t size() const noexcept { return phrases_.size(); }

  /// Greedy left-to-right longest-match count of phrases in `transcript`.
  std::size_t count_matches(const TokenSequence& transcript) const;

 private:
  std::set<std::vector<std::string>> phrases_;
};

/// Backchannel matches per minute over all transcripts. Throws
/// Errc::ZeroDuration unless minutes > 0.
double backchannel_rate(std::span<const TokenSequence> transcripts, double conversation_minutes,
                        const BackchannelLexicon& lexicon = BackchannelLexicon::default_lexicon());

}  // namespace sds::metrics
