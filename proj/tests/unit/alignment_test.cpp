// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <random>

#include <gtest/gtest.h>

#include "sds/error.hpp"
#include "sds/metrics/alignment.hpp"
#include "sds/metrics/judge.hpp"
#include "sds/metrics/text.hpp"
#include "test_support.hpp"

namespace sds::metrics {
namespace {

using Tokens = std::vector<std::string>;

TokenSequence seq(const Tokens& t) { return TokenSequence(t); }

void all_sequences(std::size_t max_len, int alphabet, std::vector<Tokens>& out) {
  out.push_back({});
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t k = begin; k < end; ++k) {
      if (out[k].size() != len - 1) continue;
      for (int s = 0; s < alphabet; ++s) {
        auto next = out[k];
        next.push_back(std::string(1, static_cast<char>('a' + s)));
        out.push_back(std::move(next));
      }
    }
    begin = end;
  }
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_text("I mean, YEAH!"), (TokenSequence{"i", "mean", "yeah"}));
  EXPECT_EQ(normalize_text("part of i- part of it though"),
            (TokenSequence{"part", "of", "i-", "part", "of", "it", "though"}));
  EXPECT_EQ(normalize_text("don't  stop"), (TokenSequence{"don't", "stop"}));
  EXPECT_TRUE(normalize_text("").empty());
  EXPECT_TRUE(normalize_text("  ... !! ").empty());
}

TEST(Normalize, UnicodeAndEdges) {
  // Decomposed e + combining acute composes to a single code point.
  EXPECT_EQ(normalize_text("Cafe\xCC\x81"), normalize_text("caf\xC3\xA9"));
  EXPECT_EQ(normalize_text("'quoted' -dash"), (TokenSequence{"quoted", "dash"}));
  EXPECT_EQ(normalize_text("mm-hmm\tuh-huh\n"), (TokenSequence{"mm-hmm", "uh-huh"}));
  EXPECT_EQ(character_sequence(normalize_text("a bc")), U"abc");
}

TEST(Normalize, Idempotent) {
  std::mt19937 rng(3);
  const std::string pool = "aB c,.'-!? \t\xC3\xA9";
  for (int i = 0; i < 500; ++i) {
    std::string raw;
    const int n = rng() % 30;
    for (int k = 0; k < n; ++k) raw += pool[rng() % pool.size()];
    const auto once = normalize_text(raw);
    ASSERT_EQ(normalize_text(join(once)), once) << raw;
    for (const auto& t : once.tokens) {
      ASSERT_FALSE(t.empty());
      ASSERT_EQ(t.find(' '), std::string::npos);
    }
  }
}

TEST(Align, Examples) {
  const auto id = align(seq({"a", "b", "c"}), seq({"a", "b", "c"}));
  EXPECT_EQ(id.errors(), 0u);
  EXPECT_EQ(id.matches, 3u);

  const auto d = align(seq({"i", "mean", "yeah", "i", "think"}), seq({"i", "mean", "i", "think"}));
  EXPECT_EQ(d.deletions, 1u);
  EXPECT_EQ(d.substitutions, 0u);
  EXPECT_EQ(d.insertions, 0u);

  const auto si = align(seq({"a", "b", "c"}), seq({"a", "x", "c", "d"}));
  EXPECT_EQ(si.substitutions, 1u);
  EXPECT_EQ(si.insertions, 1u);
  EXPECT_EQ(si.deletions, 0u);
}

TEST(Align, ExhaustiveShortSequencesMatchBruteForce) {
  std::vector<Tokens> all;
  all_sequences(6, 3, all);
  ASSERT_EQ(all.size(), 1093u);
  std::mt19937 rng(17);
  // Every pair against the table oracle, and a sample against exhaustive
  // edit-script enumeration (which is too slow for all 1.2M pairs).
  for (const auto& r : all) {
    for (const auto& h : all) {
      const auto got = align(seq(r), seq(h));
      ASSERT_EQ(got, test::table_align(r, h));
      if (r.size() + h.size() <= 7 || rng() % 400 == 0) {
        ASSERT_EQ(got, test::brute_force_align(r, h));
      }
    }
  }
}

TEST(Align, RandomLongerPairsMatchOracle) {
  std::mt19937 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const auto r = test::random_tokens(rng, 40, 4);
    const auto h = test::random_tokens(rng, 40, 4);
    ASSERT_EQ(align(seq(r), seq(h)), test::table_align(r, h));
  }
}

TEST(Align, CountsAreConsistent) {
  std::mt19937 rng(4);
  for (int i = 0; i < 2000; ++i) {
    const auto r = test::random_tokens(rng, 12, 3);
    const auto h = test::random_tokens(rng, 12, 3);
    const auto c = align(seq(r), seq(h));
    ASSERT_EQ(c.ref_len, r.size());
    ASSERT_EQ(c.matches + c.substitutions + c.deletions, r.size());
    ASSERT_EQ(c.matches + c.substitutions + c.insertions, h.size());
  }
}

TEST(Align, SwappingSidesSwapsDeletionsAndInsertions) {
  std::mt19937 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto r = test::random_tokens(rng, 10, 3);
    const auto h = test::random_tokens(rng, 10, 3);
    const auto fwd = align(seq(r), seq(h));
    const auto back = align(seq(h), seq(r));
    ASSERT_EQ(fwd.errors(), back.errors());
    ASSERT_EQ(fwd.deletions, back.insertions);
    ASSERT_EQ(fwd.insertions, back.deletions);
    ASSERT_EQ(fwd.substitutions, back.substitutions);
  }
  // Same edits, different reference length: not symmetric as a rate.
  EXPECT_NEAR(wer(seq({"a", "b", "c"}), seq({"a", "b"})), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(wer(seq({"a", "b"}), seq({"a", "b", "c"})), 1.0 / 2.0, 1e-12);
}

TEST(Align, RelabelingSymbolsKeepsCounts) {
  std::mt19937 rng(12);
  const auto relabel = [](Tokens t) {
    for (auto& s : t) s = s == "a" ? "q" : s == "b" ? "a" : "b";
    return t;
  };
  for (int i = 0; i < 500; ++i) {
    const auto r = test::random_tokens(rng, 9, 3);
    const auto h = test::random_tokens(rng, 9, 3);
    ASSERT_EQ(align(seq(r), seq(h)), align(seq(relabel(r)), seq(relabel(h))));
  }
}

TEST(Rates, Examples) {
  EXPECT_DOUBLE_EQ(wer("hello world", "Hello, world!"), 0.0);
  EXPECT_NEAR(wer("a b c", "a x c d"), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(cer("abc", "abd"), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(cer("ab c", "abc"), 0.0, 1e-12);
  EXPECT_NEAR(wer("a", "x y z w"), 4.0, 1e-12);
  EXPECT_THROW(wer("", "a"), Error);
  try {
    cer("!!", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyReference);
  }
}

TEST(Rates, CharacterAlignmentMatchesOracle) {
  std::mt19937 rng(21);
  for (int i = 0; i < 500; ++i) {
    const auto r = test::random_tokens(rng, 8, 3);
    const auto h = test::random_tokens(rng, 8, 3);
    if (r.empty()) continue;
    std::string rs, hs;
    for (const auto& t : r) rs += t;
    for (const auto& t : h) hs += t;
    Tokens rc, hc;
    for (char c : rs) rc.emplace_back(1, c);
    for (char c : hs) hc.emplace_back(1, c);
    const auto oracle = test::table_align(rc, hc);
    ASSERT_NEAR(cer(seq(r), seq(h)), static_cast<double>(oracle.substitutions + oracle.deletions + oracle.insertions) / rc.size(), 1e-12);
  }
}

TEST(JudgeReferenced, TwoJudges) {
  const std::vector<JudgeText> judges{{"J1", "a b c", ""}, {"J2", "a b", ""}};
  const auto values = judge_referenced_asr("a b", judges, 4);
  ASSERT_EQ(values.size(), 4u);
  for (const auto& v : values) {
    ASSERT_TRUE(v.ok());
    EXPECT_EQ(v.turn_id, 4);
    if (v.name == "wer" && v.source == "judge:J1") EXPECT_NEAR(*v.value, 1.0 / 3.0, 1e-12);
    if (v.name == "wer" && v.source == "judge:J2") EXPECT_DOUBLE_EQ(*v.value, 0.0);
  }
}

TEST(JudgeReferenced, IdenticalAndFailedJudges) {
  const std::vector<JudgeText> judges{{"J1", "Yes, fine.", ""}, {"J2", std::nullopt, "WorkerTimeout"},
                                      {"J3", "yes fine", ""}};
  const auto values = judge_referenced_asr("yes fine", judges);
  std::size_t ok = 0, errors = 0;
  for (const auto& v : values) {
    if (v.ok()) {
      ++ok;
      EXPECT_DOUBLE_EQ(*v.value, 0.0);
    } else {
      ++errors;
      EXPECT_EQ(v.status, MetricStatus::Error);
      EXPECT_EQ(v.judge_id(), "J2");
      EXPECT_NE(v.detail.find("WorkerTimeout"), std::string::npos);
    }
  }
  EXPECT_EQ(ok, 4u);
  EXPECT_EQ(errors, 2u);
}

TEST(Align, ExhaustiveRuntimeBudget) {
  std::vector<Tokens> all;
  all_sequences(6, 3, all);
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t total = 0;
  for (const auto& r : all)
    for (const auto& h : all) total += align(seq(r), seq(h)).errors();
  EXPECT_GT(total, 0u);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(10));
}

}  // namespace
}  // namespace sds::metrics
