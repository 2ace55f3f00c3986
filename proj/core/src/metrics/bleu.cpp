// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/metrics/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "sds/error.hpp"

namespace sds::metrics {
namespace {

using Gram = std::vector<std::string>;

std::map<Gram, std::size_t> ngram_counts(const TokenSequence& s, std::size_t n) {
  std::map<Gram, std::size_t> counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++counts[Gram(s.tokens.begin() + static_cast<std::ptrdiff_t>(i),
                  s.tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

// Candidate length against the closest reference length, ties to the shorter.
double brevity_penalty(std::size_t c, std::size_t r) {
  return c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
}

bool closer(std::size_t len, std::size_t best, std::size_t c) {
  const auto d = std::llabs(static_cast<long long>(len) - static_cast<long long>(c));
  const auto b = std::llabs(static_cast<long long>(best) - static_cast<long long>(c));
  return d < b || (d == b && len < best);
}

// Keys n-grams as one string; tokens never contain the separator.
std::string gram_key(const TokenSequence& s, std::size_t i, std::size_t n) {
  std::string key = s.tokens[i];
  for (std::size_t k = 1; k < n; ++k) key.append(1, '\x1f').append(s.tokens[i + k]);
  return key;
}

using KeyCounts = std::unordered_map<std::string, std::size_t>;

KeyCounts key_counts(const TokenSequence& s, std::size_t n) {
  KeyCounts counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[gram_key(s, i, n)];
  return counts;
}

// Largest and second-largest count of a gram over the corpus, and which
// sentence holds the largest; the max over "all but one" is then O(1).
struct TopTwo {
  std::size_t best = 0, second = 0, owner = 0;
  std::size_t excluding(std::size_t i) const noexcept { return owner == i ? second : best; }
};

}  // namespace

double bleu2(const TokenSequence& candidate, std::span<const TokenSequence> references) {
  if (candidate.empty()) throw Error(Errc::EmptyCandidate, "candidate has no tokens");
  if (references.empty()) return 0.0;
  const std::size_t c = candidate.size();

  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= 2; ++n) {
    const auto cand = ngram_counts(candidate, n);
    if (cand.empty()) continue;
    std::map<Gram, std::size_t> max_ref;
    for (const auto& ref : references) {
      for (const auto& [g, k] : ngram_counts(ref, n)) max_ref[g] = std::max(max_ref[g], k);
    }
    std::size_t clipped = 0, total = 0;
    for (const auto& [g, k] : cand) {
      total += k;
      const auto it = max_ref.find(g);
      if (it != max_ref.end()) clipped += std::min(k, it->second);
    }
    if (clipped == 0) return 0.0;
    log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    ++orders;
  }

  std::size_t r = references.front().size();
  for (const auto& ref : references) {
    if (closer(ref.size(), r, c)) r = ref.size();
  }
  return 100.0 * brevity_penalty(c, r) * std::exp(log_sum / orders);
}

// Same value as averaging bleu2(corpus[i], corpus without i), with each
// sentence's n-grams counted once.
double self_bleu2(std::span<const TokenSequence> corpus) {
  if (corpus.size() < 2) throw Error(Errc::TooFewSentences, "self-BLEU needs at least two sentences");
  for (const auto& s : corpus) {
    if (s.empty()) throw Error(Errc::EmptyCandidate, "candidate has no tokens");
  }
  const std::size_t n_sent = corpus.size();
  std::vector<KeyCounts> counts[2];
  std::unordered_map<std::string, TopTwo> top[2];
  for (std::size_t n = 1; n <= 2; ++n) {
    auto& per = counts[n - 1];
    per.reserve(n_sent);
    for (std::size_t i = 0; i < n_sent; ++i) {
      per.push_back(key_counts(corpus[i], n));
      for (const auto& [g, k] : per.back()) {
        auto& t = top[n - 1][g];
        if (k > t.best) {
          t.second = t.best;
          t.best = k;
          t.owner = i;
        } else if (k > t.second) {
          t.second = k;
        }
      }
    }
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < n_sent; ++i) {
    const std::size_t c = corpus[i].size();
    double log_sum = 0.0;
    int orders = 0;
    bool zero = false;
    for (std::size_t n = 1; n <= 2 && !zero; ++n) {
      const auto& cand = counts[n - 1][i];
      if (cand.empty()) continue;
      std::size_t clipped = 0, total = 0;
      for (const auto& [g, k] : cand) {
        total += k;
        clipped += std::min(k, top[n - 1].at(g).excluding(i));
      }
      if (clipped == 0) {
        zero = true;
        break;
      }
      log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
      ++orders;
    }
    if (zero) continue;
    std::size_t r = corpus[i == 0 ? 1 : 0].size();
    for (std::size_t j = 0; j < n_sent; ++j) {
      if (j != i && closer(corpus[j].size(), r, c)) r = corpus[j].size();
    }
    sum += 100.0 * brevity_penalty(c, r) * std::exp(log_sum / orders);
  }
  return sum / static_cast<double>(n_sent);
}

double auto_bleu2_sentence(const TokenSequence& s) {
  if (s.size() < 2) return 0.0;
  const auto counts = ngram_counts(s, 2);
  std::size_t repeated = 0;
  for (const auto& [g, k] : counts) {
    if (k > 1) repeated += k;
  }
  return static_cast<double>(repeated) / static_cast<double>(s.size() - 1);
}

double auto_bleu2(std::span<const TokenSequence> corpus) {
  if (corpus.empty()) throw Error(Errc::EmptyCorpus, "auto-BLEU needs at least one sentence");
  double sum = 0.0;
  for (const auto& s : corpus) sum += auto_bleu2_sentence(s);
  return 100.0 * sum / static_cast<double>(corpus.size());
}

double vert(double self_bleu2_pct, double auto_bleu2_pct) {
  if (self_bleu2_pct < 0.0 || auto_bleu2_pct < 0.0) {
    throw Error(Errc::InvalidArgument, "diversity scores must be non-negative");
  }
  return std::sqrt(self_bleu2_pct * auto_bleu2_pct);
}

DiversityReport diversity(std::span<const TokenSequence> corpus) {
  DiversityReport r;
  r.self_bleu2 = self_bleu2(corpus);
  r.auto_bleu2 = auto_bleu2(corpus);
  r.vert = vert(r.self_bleu2, r.auto_bleu2);
  return r;
}

}  // namespace sds::metrics
