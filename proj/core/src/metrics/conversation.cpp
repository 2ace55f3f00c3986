// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/metrics/conversation.hpp"

#include <fstream>

#include "sds/error.hpp"

namespace sds::metrics {

double speaking_rate(std::span<const SpokenTurn> turns) {
  std::size_t words = 0;
  double seconds = 0.0;
  for (const auto& t : turns) {
    words += t.word_count;
    seconds += t.speech_duration_s;
  }
  if (!(seconds > 0.0)) throw Error(Errc::ZeroDuration, "no speech time");
  return static_cast<double>(words) / (seconds / 60.0);
}

BackchannelLexicon::BackchannelLexicon(const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    auto tokens = normalize_text(p);
    if (tokens.empty() || tokens.size() > 2) {
      throw Error(Errc::InvalidArgument, "backchannel phrase must have one or two words: '" + p + "'");
    }
    phrases_.insert(std::move(tokens.tokens));
  }
}

const BackchannelLexicon& BackchannelLexicon::default_lexicon() {
  static const BackchannelLexicon lexicon({"yeah", "uh-huh", "mm-hmm", "right", "okay", "really",
                                           "i see", "oh yeah", "oh okay", "uh huh"});
  return lexicon;
}

BackchannelLexicon BackchannelLexicon::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open lexicon " + path.string());
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    if (normalize_text(line).empty() || line.front() == '#') continue;
    phrases.push_back(line);
  }
  return BackchannelLexicon(phrases);
}

std::size_t BackchannelLexicon::count_matches(const TokenSequence& transcript) const {
  std::size_t count = 0;
  const auto& t = transcript.tokens;
  for (std::size_t i = 0; i < t.size();) {
    if (i + 1 < t.size() && phrases_.count({t[i], t[i + 1]})) {
      ++count;
      i += 2;
    } else if (phrases_.count({t[i]})) {
      ++count;
      ++i;
    } else {
      ++i;
    }
  }
  return count;
}

double backchannel_rate(std::span<const TokenSequence> transcripts, double conversation_minutes,
                        const BackchannelLexicon& lexicon) {
  if (!(conversation_minutes > 0.0)) throw Error(Errc::ZeroDuration, "conversation has no duration");
  std::size_t matches = 0;
  for (const auto& t : transcripts) matches += lexicon.count_matches(t);
  return static_cast<double>(matches) / conversation_minutes;
}

}  // namespace sds::metrics
