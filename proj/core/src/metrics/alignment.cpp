// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/metrics/alignment.hpp"

#include "sds/error.hpp"

namespace sds::metrics {

namespace detail {

// With E = S + D + I, n = M + S + D and m = M + S + I, the pair (E, M)
// determines every count.
AlignmentCounts counts_from(std::size_t n, std::size_t m, const Cell& end) noexcept {
  AlignmentCounts c;
  c.ref_len = n;
  c.matches = end.matches;
  c.insertions = end.cost + end.matches - n;
  c.substitutions = m - end.matches - c.insertions;
  c.deletions = n - end.matches - c.substitutions;
  return c;
}

}  // namespace detail

AlignmentCounts align(const TokenSequence& ref, const TokenSequence& hyp) {
  return align_sequences<std::string>(ref.tokens, hyp.tokens);
}

AlignmentCounts align_chars(std::u32string_view ref, std::u32string_view hyp) {
  return align_sequences<char32_t>(std::span(ref.data(), ref.size()), std::span(hyp.data(), hyp.size()));
}

double error_rate(const AlignmentCounts& counts) {
  if (counts.ref_len == 0) throw Error(Errc::EmptyReference, "reference has no tokens");
  return static_cast<double>(counts.errors()) / static_cast<double>(counts.ref_len);
}

double wer(const TokenSequence& ref, const TokenSequence& hyp) { return error_rate(align(ref, hyp)); }

double cer(const TokenSequence& ref, const TokenSequence& hyp) {
  return error_rate(align_chars(character_sequence(ref), character_sequence(hyp)));
}

double wer(std::string_view ref_text, std::string_view hyp_text) {
  return wer(normalize_text(ref_text), normalize_text(hyp_text));
}

double cer(std::string_view ref_text, std::string_view hyp_text) {
  return cer(normalize_text(ref_text), normalize_text(hyp_text));
}

}  // namespace sds::metrics
