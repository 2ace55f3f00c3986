// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS or FAIL line per criterion and exits
// non-zero if any failed.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sds/error.hpp"
#include "sds/eval/evaluators.hpp"
#include "sds/gateway/channel.hpp"
#include "sds/gateway/feedback.hpp"
#include "sds/gateway/session_manager.hpp"
#include "sds/metrics/alignment.hpp"
#include "sds/metrics/bleu.hpp"
#include "sds/metrics/turn_taking.hpp"
#include "sds/orchestrator/session.hpp"
#include "sds/protocol/frame.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using namespace sds;
using Tokens = std::vector<std::string>;
using clock_type = std::chrono::steady_clock;

// Thrown by require(); the message becomes the FAIL reason.
struct Unmet {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Unmet{what};
}

std::string fmt(double v, int digits = 2) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

// ---- alignment -------------------------------------------------------------

std::vector<Tokens> all_sequences(std::size_t max_len, int alphabet) {
  std::vector<Tokens> out{{}};
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].size() == max_len) continue;
    for (int s = 0; s < alphabet; ++s) {
      auto next = out[k];
      next.emplace_back(1, static_cast<char>('a' + s));
      out.push_back(std::move(next));
    }
  }
  return out;
}

double oracle_rate(const metrics::AlignmentCounts& c, std::size_t ref_len) {
  return static_cast<double>(c.substitutions + c.deletions + c.insertions) / static_cast<double>(ref_len);
}

std::string alignment_oracle() {
  const auto all = all_sequences(6, 3);
  require(all.size() == 1093, "expected 1093 sequences, got " + std::to_string(all.size()));
  std::vector<metrics::TokenSequence> seqs;
  for (const auto& t : all) seqs.emplace_back(t);

  double impl_ms = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      const auto t0 = clock_type::now();
      const auto got = metrics::align(seqs[i], seqs[j]);
      std::optional<double> w, c;
      if (!all[i].empty()) {
        w = metrics::wer(seqs[i], seqs[j]);
        // Single-character tokens: character alignment equals token alignment.
        c = metrics::cer(seqs[i], seqs[j]);
      }
      impl_ms += ms_since(t0);
      const auto want = sds::test::table_align(all[i], all[j]);
      require(got == want, "align mismatch at pair " + std::to_string(pairs));
      if (w) {
        require(*w == oracle_rate(want, all[i].size()), "wer mismatch at pair " + std::to_string(pairs));
        require(*c == oracle_rate(want, all[i].size()), "cer mismatch at pair " + std::to_string(pairs));
      }
      ++pairs;
    }
  }
  std::mt19937 rng(99);
  for (int k = 0; k < 1000; ++k) {
    const auto r = sds::test::random_tokens(rng, 40, 4);
    const auto h = sds::test::random_tokens(rng, 40, 4);
    const auto t0 = clock_type::now();
    const auto got = metrics::align(metrics::TokenSequence(r), metrics::TokenSequence(h));
    impl_ms += ms_since(t0);
    const auto want = sds::test::table_align(r, h);
    require(got == want, "random pair " + std::to_string(k) + " mismatch");
    if (!r.empty()) {
      require(metrics::wer(metrics::TokenSequence(r), metrics::TokenSequence(h)) == oracle_rate(want, r.size()),
              "random wer mismatch");
    }
  }
  require(impl_ms < 10000.0, "runtime " + fmt(impl_ms, 0) + " ms");
  return std::to_string(pairs) + " exhaustive + 1000 random pairs, " + fmt(impl_ms, 0) + " ms";
}

// ---- diversity -------------------------------------------------------------

std::string vert_consistency() {
  const double self[] = {75.9, 77.1, 93.3};
  const double autob[] = {0.4, 0.3, 6.2};
  const double derived[] = {5.51, 4.81, 24.05};
  const double rounded[] = {5.7, 5.0, 24.1};
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const double v = metrics::vert(self[i], autob[i]);
    require(std::abs(v - derived[i]) <= 0.005, "vert #" + std::to_string(i) + " = " + fmt(v, 4));
    require(std::abs(v - rounded[i]) <= 0.6, "vert #" + std::to_string(i) + " off rounded target by " +
                                                     fmt(std::abs(v - rounded[i]), 3));
    detail += (i ? ", " : "") + fmt(v);
  }
  return "{" + detail + "}";
}

std::string diversity_invariants() {
  const std::vector<metrics::TokenSequence> same(5, metrics::TokenSequence(Tokens{"the", "cat", "sat", "down"}));
  const double s = metrics::self_bleu2(same);
  require(std::abs(s - 100.0) <= 1e-9, "self_bleu2 of identical corpus = " + fmt(s, 12));

  const std::vector<metrics::TokenSequence> distinct = {
      metrics::TokenSequence(Tokens{"a", "b", "c", "d"}), metrics::TokenSequence(Tokens{"e", "f", "g"}),
      metrics::TokenSequence(Tokens{"h", "i", "j", "k", "l"})};
  const double a = metrics::auto_bleu2(distinct);
  require(a == 0.0, "auto_bleu2 of distinct bigrams = " + fmt(a, 12));

  std::mt19937 rng(7);
  for (int k = 0; k < 100; ++k) {
    std::vector<metrics::TokenSequence> corpus;
    const int n = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      auto t = sds::test::random_tokens(rng, 12, 5);
      while (t.size() < 2) t.push_back("z");
      corpus.emplace_back(t);
    }
    const auto before = metrics::diversity(corpus);
    std::shuffle(corpus.begin(), corpus.end(), rng);
    const auto after = metrics::diversity(corpus);
    require(std::abs(before.self_bleu2 - after.self_bleu2) <= 1e-9 &&
                std::abs(before.auto_bleu2 - after.auto_bleu2) <= 1e-9,
            "permutation changed corpus " + std::to_string(k));
  }
  return "self 100, auto 0, 100 permutations";
}

// ---- turn-taking -----------------------------------------------------------

std::string turn_taking() {
  using metrics::Channel;
  const metrics::SpeechInterval one[] = {{Channel::A, 0, 10}, {Channel::A, 12, 20}, {Channel::B, 25, 40}};
  const auto r1 = metrics::analyze_turn_taking(one, 60.0);
  require(r1.ipu.count == 3 && r1.pause.count == 1 && r1.gap.count == 1 && r1.overlap.count == 0,
          "example 1 counts");
  require(r1.ipu.events_per_minute == 3.0, "example 1 IPU rate");
  require(std::abs(r1.ipu.cumulated_duration_pct - 55.0) < 1e-9, "example 1 IPU share");
  require(std::abs(r1.pause.cumulated_duration_pct - 200.0 / 60.0) < 1e-9, "example 1 pause share");
  require(std::abs(r1.gap.cumulated_duration_pct - 500.0 / 60.0) < 1e-9, "example 1 gap share");

  const metrics::SpeechInterval two[] = {{Channel::A, 0, 10}, {Channel::B, 5, 15}};
  const auto r2 = metrics::analyze_turn_taking(two, 20.0);
  require(r2.overlap.count == 1 && std::abs(r2.overlap.cumulated_duration_pct - 25.0) < 1e-9, "example 2 overlap");
  require(r2.ipu.count == 2 && r2.pause.count + r2.gap.count == 0, "example 2 counts");

  std::mt19937 rng(31);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const double total = 5.0 + (rng() % 2000) / 10.0;
    std::vector<metrics::SpeechInterval> iv;
    const int n = static_cast<int>(rng() % 14);
    for (int i = 0; i < n; ++i) {
      const double start = (rng() % static_cast<unsigned>(total * 10)) / 10.0;
      const double end = std::min(total, start + 0.1 + (rng() % 80) / 10.0);
      if (end > start) iv.push_back({rng() % 2 ? Channel::A : Channel::B, start, end});
    }
    const auto r = metrics::analyze_turn_taking(iv, total);
    const double sum = r.pause.cumulated_duration_pct + r.gap.cumulated_duration_pct + r.union_speech_pct +
                       r.edge_silence_pct;
    worst = std::max(worst, std::abs(sum - 100.0));
    require(std::abs(sum - 100.0) < 1e-6, "conservation broken on timeline " + std::to_string(k));
  }

  const std::string corpus = R"({"conversation_id":"t","channel":"A","start_s":0,"end_s":2,"text":"hi there"})"
                             "\n"
                             R"({"conversation_id":"t","channel":"B","start_s":3,"end_s":4,"text":"hello"})"
                             "\n";
  std::istringstream in(corpus);
  const auto report = eval::eval_turn_taking(eval::parse_corpus(in));
  const auto* t = report.find("turn-taking");
  require(t != nullptr, "no turn-taking table");
  require(t->rows == Tokens{"IPU", "Pause", "Gap", "Overlap"}, "row schema");
  require(t->columns == Tokens{"Number of events / minute", "% Cumulated duration"}, "column schema");
  return "examples exact, 1000 timelines conserve within " + fmt(worst, 12);
}

// ---- live sessions ---------------------------------------------------------

struct Recorder {
  std::mutex mu;
  std::vector<orch::SessionEvent> events;

  orch::EventSink sink() {
    return [this](const orch::SessionEvent& e) {
      std::lock_guard lock(mu);
      events.push_back(e);
    };
  }
  template <class T>
  std::size_t count() {
    std::lock_guard lock(mu);
    std::size_t n = 0;
    for (const auto& e : events) n += std::holds_alternative<T>(e);
    return n;
  }
};

orch::PipelineConfig mock_cascade() {
  return orch::PipelineConfig::cascaded("echo-asr", "template-llm", "tone-tts");
}

std::vector<std::int16_t> utterance(double speech_s, double silence_s = 1.0) {
  return sds::test::concat({sds::test::speech(speech_s), sds::test::silence(silence_s)});
}

std::string loopback() {
  sds::test::MockHarness h;
  orch::Session s("acc", mock_cascade(), h.registry);
  s.ingest_pcm(utterance(1.0));
  require(s.history().size() == 1, "cascaded turn did not complete");
  const auto t = s.history()[0];
  require(!t.failed, "turn failed: " + t.error);
  require(t.asr_text && !t.asr_text->empty(), "asr_text missing");
  require(!t.response_text.empty(), "response_text missing");
  require(!t.response_audio.empty(), "response_audio missing");
  require(t.latency.asr_ms && t.latency.llm_ms && t.latency.tts_ms, "stage latency missing");
  require(t.latency.total_ms > 0 && t.latency.total_ms < 200.0, "total_ms = " + fmt(t.latency.total_ms));

  orch::Session e("acc-e2e", orch::PipelineConfig::e2e("mock-e2e"), h.registry);
  e.ingest_pcm(utterance(0.8));
  e.wait_idle();
  require(e.history().size() == 1, "e2e turn did not complete");
  const auto et = e.history()[0];
  require(!et.failed, "e2e turn failed: " + et.error);
  require(!et.asr_text, "e2e turn has asr_text");
  require(!et.response_audio.empty(), "e2e turn has no audio");
  return "total " + fmt(t.latency.total_ms) + " ms (asr " + fmt(*t.latency.asr_ms) + ", llm " +
         fmt(*t.latency.llm_ms) + ", tts " + fmt(*t.latency.tts_ms) + "); e2e without asr_text";
}

std::string barge_in() {
  sds::test::MockHarness h;
  Recorder rec;
  orch::SessionOptions opts;
  opts.sink = rec.sink();
  orch::Session s("acc", mock_cascade(), h.registry, std::move(opts));
  s.ingest_pcm(utterance(1.0));
  require(s.state() == orch::State::Speaking, "not speaking after turn");
  require(s.next_playback_chunk().has_value(), "no playback");

  const auto speech = sds::test::speech(0.5);
  std::size_t after_onset = 0;
  bool barged = false;
  // 100 ms of input per playback chunk, as a real-time client would send.
  constexpr std::size_t kStep = 16000 * orch::kPlaybackChunkMs / 1000;
  for (std::size_t off = 0; off < speech.size() && !barged; off += kStep) {
    s.ingest_pcm(std::span(speech).subspan(off, std::min(kStep, speech.size() - off)));
    barged = rec.count<orch::event::BargeIn>() > 0;
    if (s.next_playback_chunk()) ++after_onset;
  }
  require(barged, "no barge-in");
  require(after_onset <= 1, std::to_string(after_onset) + " chunks after onset");
  require(!s.next_playback_chunk(), "playback continued");
  require(s.history()[0].interrupted, "turn not flagged");
  return std::to_string(after_onset) + " chunk(s) after onset, turn flagged";
}

std::string session_cap() {
  sds::test::MockHarness h;
  Recorder rec;
  orch::SessionOptions opts;
  opts.sink = rec.sink();
  auto now = std::make_shared<std::atomic<double>>(0.0);
  opts.clock = [now] { return now->load(); };
  orch::Session s("acc", mock_cascade(), h.registry, std::move(opts));
  audio::AudioFrame frame;
  frame.format = {16000, 1};
  frame.samples = sds::test::speech(0.02);
  frame.valid_samples = frame.samples.size();
  frame.start_time_s = 301.0;
  bool expired = false;
  try {
    s.ingest_audio(frame);
  } catch (const Error& e) {
    expired = e.code() == Errc::SessionExpired;
  }
  require(expired, "audio at 301 s accepted");
  require(rec.count<orch::event::SessionExpired>() == 1, "no session_expired event");
  try {
    s.ingest_pcm(utterance(1.0));
  } catch (const Error&) {
  }
  require(s.history().empty(), "turn processed after expiry");
  require(s.state() == orch::State::Expired, "state not Expired");
  return "expired at 301 s, 0 turns after";
}

std::string privacy_default() {
  sds::test::TempDir dir;
  const auto root = dir.path() / "store";
  sds::test::MockHarness h;
  gateway::GatewayOptions opts;
  opts.storage.enabled = false;
  opts.storage.root_path = root;
  gateway::SessionManager manager(h.registry, opts);
  const auto id = manager.create(mock_cascade());
  std::size_t messages = 0;
  gateway::SessionChannel ch(manager, id, {[&](gateway::ServerMessage) { ++messages; }, [] {}});
  ch.open();
  ch.on_text(R"({"type":"privacy_ack"})");
  for (int turn = 0; turn < 2; ++turn) {
    ch.on_binary(audio::pcm_to_le_bytes(utterance(1.0)));
    manager.find(id)->session->wait_idle();
    while (ch.pump_playback()) {
    }
    manager.find(id)->session->wait_idle();
  }
  ch.on_text(R"({"type":"feedback","turn_id":1,"dimension":"naturalness","level":1})");
  ch.on_text(R"({"type":"end_session"})");
  require(manager.find(id)->session->history().size() == 2, "scripted session did not run two turns");
  const auto files = sds::test::count_files(dir.path());
  require(!fs::exists(root) && files == 0, std::to_string(files) + " files written");
  return "2 turns, " + std::to_string(messages) + " messages, 0 files";
}

// ---- batch -----------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

std::string batch_determinism(const std::string& sds_eval, const std::string& corpus) {
  require(!sds_eval.empty() && !corpus.empty(), "--sds-eval and --corpus are required");
  sds::test::TempDir dir;
  std::vector<std::string> outputs;
  for (const char* format : {"text", "json"}) {
    for (int run = 0; run < 2; ++run) {
      const auto out = dir.path() / ("r" + std::to_string(run) + "." + format);
      const auto cmd = quote(sds_eval) + " all --corpus " + quote(corpus) + " --format " + format + " --out " +
                       quote(out.string());
      const int rc = std::system(cmd.c_str());
      require(rc == 0, "sds-eval exited with " + std::to_string(rc));
      outputs.push_back(read_file(out));
    }
  }
  require(!outputs[0].empty() && outputs[0] == outputs[1], "text reports differ");
  require(!outputs[2].empty() && outputs[2] == outputs[3], "json reports differ");

  const auto report = nlohmann::json::parse(outputs[2]);
  std::vector<std::string> dropped;
  for (const auto& n : report.at("notes")) {
    const auto s = n.get<std::string>();
    if (s.starts_with("dropped contained utterance")) dropped.push_back(s);
  }
  require(dropped.size() == 1, std::to_string(dropped.size()) + " utterances dropped");
  require(dropped[0] == "dropped contained utterance toy-1 B [5.00, 5.60) line 6", "dropped: " + dropped[0]);
  return "identical text and json reports; " + dropped[0];
}

// ---- feedback and protocol -------------------------------------------------

std::string feedback_aggregation() {
  std::vector<gateway::FeedbackRating> ratings;
  const std::pair<int, int> counts[] = {{1, 380}, {2, 88}, {3, 8}, {4, 25}};
  for (auto [level, n] : counts) {
    for (int i = 0; i < n; ++i) ratings.push_back({i, gateway::Dimension::Naturalness, level, 0.0});
  }
  const auto a = gateway::aggregate(ratings, gateway::Dimension::Naturalness);
  require(a.total == 501, "total " + std::to_string(a.total));
  const auto pct = a.percentages();
  const double want[] = {75.8, 17.6, 1.6, 5.0};
  std::string detail;
  for (int i = 0; i < gateway::kLevels; ++i) {
    const double got = std::round(pct[i] * 10.0) / 10.0;
    require(got == want[i], "level " + std::to_string(i + 1) + " = " + fmt(pct[i], 3));
    detail += (i ? ", " : "") + fmt(got, 1);
  }
  return "{" + detail + "}";
}

std::string protocol_fuzz() {
  using protocol::FrameKind;
  std::mt19937 rng(2024);
  std::size_t rejected = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::byte> payload(rng() % 256);
    for (auto& b : payload) b = static_cast<std::byte>(rng());
    const auto kind = rng() % 2 ? FrameKind::Audio : FrameKind::Header;
    const auto enc = protocol::encode_frame(kind, payload);
    const auto dec = protocol::decode_frame(enc);
    require(dec.frame.kind == kind && dec.frame.payload == payload && dec.consumed == enc.size(),
            "round trip " + std::to_string(i));

    const auto cut = std::span(enc).first(rng() % enc.size());
    try {
      protocol::decode_frame(cut);
      throw Unmet{"truncated frame accepted at " + std::to_string(i)};
    } catch (const Error&) {
      ++rejected;
    }
    auto mutated = enc;
    mutated[4] = static_cast<std::byte>(2 + rng() % 254);
    try {
      protocol::decode_frame(mutated);
      throw Unmet{"bad kind accepted at " + std::to_string(i)};
    } catch (const Error&) {
      ++rejected;
    }
  }
  return "10000 round trips, " + std::to_string(rejected) + " bad inputs rejected";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sds acceptance suite"};
  std::string sds_eval, corpus;
  app.add_option("--sds-eval", sds_eval, "path to the sds-eval binary");
  app.add_option("--corpus", corpus, "toy corpus for the batch check");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"alignment-oracle", alignment_oracle},
      {"vert-consistency", vert_consistency},
      {"diversity-invariants", diversity_invariants},
      {"turn-taking-analyzer", turn_taking},
      {"loopback-conversation", loopback},
      {"barge-in", barge_in},
      {"session-cap", session_cap},
      {"privacy-default", privacy_default},
      {"batch-determinism", [&] { return batch_determinism(sds_eval, corpus); }},
      {"feedback-aggregation", feedback_aggregation},
      {"protocol-fuzz", protocol_fuzz},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    std::string line;
    try {
      line = "PASS " + name + ": " + check();
    } catch (const Unmet& u) {
      line = "FAIL " + name + ": " + u.what;
    } catch (const std::exception& e) {
      line = "FAIL " + name + ": exception: " + e.what();
    }
    failed += line.starts_with("FAIL");
    std::cout << line << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
