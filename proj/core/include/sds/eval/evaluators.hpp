// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sds/eval/corpus.hpp"
#include "sds/eval/report.hpp"
#include "sds/metrics/conversation.hpp"

namespace sds::protocol {
class WorkerRegistry;
}

namespace sds::eval {

struct EvalOptions {
  // Model ids to evaluate; empty means every advertised model of the task.
  std::set<std::string> models;
  // Judge worker ids to consult; nullopt means all registered judges.
  std::optional<std::set<std::string>> judges;
  std::optional<std::chrono::milliseconds> deadline;
  const metrics::BackchannelLexicon* lexicon = nullptr;
};

/// "ground_truth" or "<prefix>:<model>".
struct TextSource {
  std::optional<std::string> model;

  bool ground_truth() const noexcept { return !model.has_value(); }
  /// Throws Errc::InvalidArgument for anything else.
  static TextSource parse(const std::string& value, const std::string& prefix);
};

/// Contained utterances are dropped before any model sees the corpus; the
/// report notes each drop.
std::vector<CorpusUtterance> surviving_utterances(const Conversation& c);

/// Table "asr": one row per model with pooled WER and CER (percent) against
/// the ground truth. Transcript judges appear as extra rows "judge:<id>".
/// Throws Errc::MissingAudio before dispatching anything if a surviving
/// utterance has no audio.
EvalReport eval_asr(const Corpus& corpus, protocol::WorkerRegistry& registry, const EvalOptions& options);

/// Table "llm": metric rows, one column per model (two per model, ground
/// truth and ASR transcript contexts, when the source is asr:<model>).
EvalReport eval_llm(const Corpus& corpus, protocol::WorkerRegistry& registry, const TextSource& context_source,
                    const EvalOptions& options);

/// Table "tts": one row per model (or per model and input kind when the
/// source is llm:<model>); intelligibility per transcript judge and the
/// speech-quality metrics.
EvalReport eval_tts(const Corpus& corpus, protocol::WorkerRegistry& registry, const TextSource& input_source,
                    const EvalOptions& options);

/// Per-conversation event tables, a duration-weighted aggregate and a
/// summary with speaking and backchannel rates. Throws Errc::SingleChannel.
EvalReport eval_turn_taking(const Corpus& corpus, const EvalOptions& options = {});

}  // namespace sds::eval
