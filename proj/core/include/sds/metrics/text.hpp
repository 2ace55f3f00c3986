// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace sds::metrics {

/// Normalized words: no whitespace inside a token, no empty tokens.
struct TokenSequence {
  std::vector<std::string> tokens;

  TokenSequence() = default;
  explicit TokenSequence(std::vector<std::string> t) : tokens(std::move(t)) {}
  TokenSequence(std::initializer_list<std::string> t) : tokens(t) {}

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Unicode NFC, lowercase, punctuation and symbols removed except
/// word-internal apostrophes and hyphens that follow a word character (which
/// keeps truncation markers such as "i-"), whitespace collapsed.
TokenSequence normalize_text(std::string_view raw);

/// Code points of the normalized text with spaces removed (CER basis).
std::u32string character_sequence(const TokenSequence& tokens);

std::u32string utf8_to_utf32(std::string_view utf8);

/// Splits on ASCII whitespace without normalizing.
TokenSequence split_words(std::string_view text);

std::string join(const TokenSequence& tokens, std::string_view sep = " ");

}  // namespace sds::metrics
