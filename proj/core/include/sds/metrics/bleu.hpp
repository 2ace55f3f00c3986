// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "sds/metrics/text.hpp"

namespace sds::metrics {

/// Sentence BLEU with orders 1 and 2, in percent. Precisions are clipped at
/// the per-n-gram maximum count over references; the brevity penalty uses
/// the reference length closest to the candidate (shorter on ties). An
/// order is left out when the candidate has no n-grams of it, and any
/// included zero precision makes the score 0.
/// Throws Errc::EmptyCandidate.
double bleu2(const TokenSequence& candidate, std::span<const TokenSequence> references);

/// Mean bleu2 of each sentence against all the others. Throws
/// Errc::TooFewSentences below two sentences.
double self_bleu2(std::span<const TokenSequence> corpus);

/// Fraction of bigram occurrences whose bigram occurs again elsewhere in
/// the same sentence, averaged over sentences (sentences under two tokens
/// score 0), in percent. Throws Errc::EmptyCorpus.
double auto_bleu2(std::span<const TokenSequence> corpus);
/// Per-sentence value as a fraction in [0, 1].
double auto_bleu2_sentence(const TokenSequence& sentence);

/// Geometric mean of the two diversity scores.
double vert(double self_bleu2_pct, double auto_bleu2_pct);

struct DiversityReport {
  double self_bleu2 = 0.0;
  double auto_bleu2 = 0.0;
  double vert = 0.0;
};

DiversityReport diversity(std::span<const TokenSequence> corpus);

}  // namespace sds::metrics
