// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sds/eval/corpus.hpp"

namespace sds::eval {

/// Whether `outer` covers `inner` (outer.start <= inner.start and
/// inner.end <= outer.end).
bool contains(const CorpusUtterance& outer, const CorpusUtterance& inner) noexcept;

/// Drops every utterance lying inside another one. Of two utterances with
/// the same span, the earlier in file order survives. Output keeps the
/// input order.
std::vector<CorpusUtterance> filter_contained(const std::vector<CorpusUtterance>& utterances);

struct DialogueContext {
  CorpusUtterance current;
  // Text used for the current utterance (ground truth or a transcript).
  std::string current_text;
  // Prior survivors and the current one as "User: ..." / "Assistant: ..."
  // lines; the current speaker is the user.
  std::string context_text;
};

using TextOf = std::function<std::string(const CorpusUtterance&)>;

/// One context per surviving utterance, built from survivors with a
/// strictly earlier start. `text_of` supplies each utterance's text
/// (ground truth when empty).
std::vector<DialogueContext> build_dialogue_contexts(const Conversation& conversation, const TextOf& text_of = {});

}  // namespace sds::eval
