// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "sds/audio.hpp"
#include "sds/metrics/turn_taking.hpp"

namespace sds::eval {

using metrics::Channel;

/// One line of a corpus file:
///   {"conversation_id": "...", "channel": "A"|"B", "start_s": 0.0,
///    "end_s": 1.2, "text": "...", "audio_path": "optional.wav"}
/// Relative audio paths resolve against the corpus file's directory.
struct CorpusUtterance {
  std::string conversation_id;
  Channel channel = Channel::A;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
  std::optional<std::filesystem::path> audio_path;
  // 1-based line in the source file; also the file-order tie-break.
  std::size_t line = 0;
};

struct Conversation {
  std::string id;
  // Sorted by start time, file order among equal starts.
  std::vector<CorpusUtterance> utterances;

  double duration_s() const noexcept;
  bool has_both_channels() const noexcept;
};

struct Corpus {
  std::filesystem::path path;
  // Ordered by conversation id.
  std::vector<Conversation> conversations;

  std::size_t utterance_count() const noexcept;
};

/// Throws Errc::ParseError or Errc::InvariantViolation naming the line.
Corpus parse_corpus(std::istream& in, const std::filesystem::path& base_dir = {});
/// Also Errc::IoFailure when the file cannot be opened.
Corpus load_corpus(const std::filesystem::path& path);

/// Throws Errc::MissingAudio when the utterance has no audio file.
audio::AudioBuffer load_utterance_audio(const CorpusUtterance& u);

}  // namespace sds::eval
