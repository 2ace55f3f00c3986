// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sds/error.hpp"
#include "sds/eval/contexts.hpp"
#include "sds/eval/corpus.hpp"
#include "sds/eval/evaluators.hpp"
#include "sds/eval/report.hpp"
#include "sds/metrics/turn_taking.hpp"
#include "sds/protocol/worker.hpp"
#include "sds/wav.hpp"
#include "test_support.hpp"

namespace sds::eval {
namespace {

namespace fs = std::filesystem;
using protocol::mock::MockHandler;
using protocol::mock::MockSetOptions;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no sds::Error thrown";
  return Errc::InvalidArgument;
}

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

std::string line(const std::string& conv, char ch, double start, double end, const std::string& text,
                 const std::string& audio = "") {
  nlohmann::json j{{"conversation_id", conv}, {"channel", std::string(1, ch)}, {"start_s", start},
                   {"end_s", end}, {"text", text}};
  if (!audio.empty()) j["audio_path"] = audio;
  return j.dump() + "\n";
}

// Writes a corpus whose utterance audio lengths are distinct, so a table
// keyed by sample count can play a deterministic ASR.
class CorpusFiles {
 public:
  explicit CorpusFiles(const fs::path& dir) : dir_(dir) {}

  void add(const std::string& conv, char ch, double start, double end, const std::string& text, bool audio = true) {
    std::string name;
    if (audio) {
      name = "u" + std::to_string(count_) + ".wav";
      const auto bytes = wav::encode({test::speech(0.1 + 0.01 * count_, 8000), {8000, 1}});
      std::ofstream(dir_ / name, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                         static_cast<std::streamsize>(bytes.size()));
    }
    ++count_;
    text_ += line(conv, ch, start, end, text, name);
  }
  fs::path write() {
    const auto p = dir_ / "corpus.jsonl";
    std::ofstream(p) << text_;
    return p;
  }

 private:
  fs::path dir_;
  std::string text_;
  int count_ = 0;
};

// Answers with a fixed transcript per utterance, chosen by audio length.
class TableAsr final : public MockHandler {
 public:
  explicit TableAsr(std::vector<std::string> answers)
      : MockHandler(protocol::Hello{"table-asr", protocol::Task::Asr, {"table"}, {}}, nullptr),
        answers_(std::move(answers)) {}

 protected:
  protocol::InferOutput respond(const nlohmann::json&, const std::optional<audio::AudioBuffer>& audio) override {
    const auto n = audio->samples.size();
    const auto idx = static_cast<std::size_t>(std::lround((n / 8000.0 - 0.1) / 0.01));
    return {{{"text", answers_.at(idx)}}, std::nullopt};
  }

 private:
  std::vector<std::string> answers_;
};

EvalOptions no_judges(std::set<std::string> models = {}) {
  EvalOptions o;
  o.models = std::move(models);
  o.judges = std::set<std::string>{};
  return o;
}

TEST(Corpus, ParsesGroupsAndSorts) {
  const auto c = parse(line("b", 'A', 2, 3, "two") + line("a", 'B', 5, 6, "late") + line("b", 'B', 0, 1, "one") +
                       line("a", 'A', 1, 2, "early"));
  ASSERT_EQ(c.conversations.size(), 2u);
  EXPECT_EQ(c.conversations[0].id, "a");
  EXPECT_EQ(c.conversations[0].utterances[0].text, "early");
  EXPECT_EQ(c.conversations[0].utterances[0].line, 4u);
  EXPECT_EQ(c.conversations[1].utterances[0].text, "one");
  EXPECT_EQ(c.utterance_count(), 4u);
  EXPECT_DOUBLE_EQ(c.conversations[0].duration_s(), 6.0);
  EXPECT_TRUE(c.conversations[0].has_both_channels());
}

TEST(Corpus, RejectsBadLines) {
  const auto bad_span = line("a", 'A', 0, 1, "x") + line("a", 'A', 3, 3, "y");
  try {
    parse(bad_span);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvariantViolation);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { parse("{not json\n"); }), Errc::ParseError);
  EXPECT_EQ(code_of([] { parse(R"({"conversation_id":"a","channel":"C","start_s":0,"end_s":1,"text":""})" "\n"); }),
            Errc::InvariantViolation);
  EXPECT_EQ(code_of([] { parse(R"({"conversation_id":"a","channel":"A","start_s":0,"text":""})" "\n"); }),
            Errc::ParseError);
  EXPECT_EQ(code_of([] { load_corpus("/nonexistent/corpus.jsonl"); }), Errc::IoFailure);
  EXPECT_EQ(parse("\n\n").utterance_count(), 0u);
}

TEST(Corpus, ToyFixtureLoads) {
  const auto c = load_corpus(SDS_TOY_CORPUS);
  EXPECT_EQ(c.utterance_count(), 10u);
  ASSERT_EQ(c.conversations.size(), 2u);
  for (const auto& conv : c.conversations) {
    for (const auto& u : conv.utterances) {
      ASSERT_TRUE(u.audio_path);
      EXPECT_TRUE(fs::exists(*u.audio_path)) << *u.audio_path;
    }
  }
  const auto a = load_utterance_audio(c.conversations[0].utterances[0]);
  EXPECT_EQ(a.format.sample_rate_hz, 8000);
  EXPECT_FALSE(a.empty());
  CorpusUtterance bare;
  EXPECT_EQ(code_of([&] { load_utterance_audio(bare); }), Errc::MissingAudio);
}

TEST(Contexts, ContainedUtteranceDropped) {
  const auto c = parse(line("x", 'A', 0, 5, "long turn") + line("x", 'B', 1, 3, "yeah") + line("x", 'B', 6, 8, "ok then"));
  const auto survivors = filter_contained(c.conversations[0].utterances);
  ASSERT_EQ(survivors.size(), 2u);
  EXPECT_EQ(survivors[0].text, "long turn");
  EXPECT_EQ(survivors[1].text, "ok then");
  const auto ctx = build_dialogue_contexts(c.conversations[0]);
  ASSERT_EQ(ctx.size(), 2u);
  EXPECT_EQ(ctx[0].context_text, "User: long turn");
  // Roles are relative to the speaker of the current utterance.
  EXPECT_EQ(ctx[1].context_text, "Assistant: long turn\nUser: ok then");
  EXPECT_EQ(ctx[1].current_text, "ok then");
}

TEST(Contexts, SingleUtteranceAndCustomText) {
  const auto c = parse(line("x", 'A', 0, 1, "Hello."));
  const auto ctx = build_dialogue_contexts(c.conversations[0], [](const CorpusUtterance&) { return "hi"; });
  ASSERT_EQ(ctx.size(), 1u);
  EXPECT_EQ(ctx[0].current_text, "hi");
  EXPECT_EQ(ctx[0].context_text, "User: hi");
}

TEST(Contexts, EqualSpansKeepFileOrder) {
  const auto c = parse(line("x", 'A', 0, 2, "first") + line("x", 'B', 0, 2, "second"));
  const auto s = filter_contained(c.conversations[0].utterances);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].text, "first");
}

TEST(Contexts, FilterIsOrderIndependent) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<CorpusUtterance> us;
    const int n = 1 + rng() % 8;
    for (int i = 0; i < n; ++i) {
      CorpusUtterance u;
      u.start_s = rng() % 10;
      u.end_s = u.start_s + 1 + rng() % 5;
      u.line = static_cast<std::size_t>(i + 1);
      us.push_back(u);
    }
    auto lines_of = [](const std::vector<CorpusUtterance>& v) {
      std::vector<std::size_t> out;
      for (const auto& u : v) out.push_back(u.line);
      std::sort(out.begin(), out.end());
      return out;
    };
    const auto base = lines_of(filter_contained(us));
    for (const auto& kept : filter_contained(us)) {
      for (const auto& other : us) {
        if (other.line == kept.line) continue;
        ASSERT_FALSE(contains(other, kept) && !(contains(kept, other) && kept.line < other.line));
      }
    }
    std::shuffle(us.begin(), us.end(), rng);
    ASSERT_EQ(lines_of(filter_contained(us)), base);
  }
}

TEST(TextSourceSpec, Parsing) {
  EXPECT_TRUE(TextSource::parse("ground_truth", "asr").ground_truth());
  EXPECT_TRUE(TextSource::parse("", "asr").ground_truth());
  EXPECT_EQ(TextSource::parse("asr:echo-asr", "asr").model, "echo-asr");
  EXPECT_THROW(TextSource::parse("llm:x", "asr"), Error);
  EXPECT_THROW(TextSource::parse("asr:", "asr"), Error);
}

TEST(EvalAsr, PooledNotMeanOfRatios) {
  test::TempDir dir;
  CorpusFiles files(dir.path());
  files.add("c", 'A', 0, 1, "a b c d");
  files.add("c", 'B', 2, 3, "x");
  files.add("c", 'A', 4, 5, "p q r s t");
  const auto corpus = load_corpus(files.write());
  test::MockHarness h;
  protocol::InProcessWorker w(h.registry, std::make_shared<TableAsr>(std::vector<std::string>{"a b c d", "y z", "p q"}));
  const auto report = eval_asr(corpus, h.registry, no_judges({"table"}));
  const auto* t = report.find("asr");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->rows, std::vector<std::string>{"table"});
  // (0 + 2 + 3) errors over (4 + 1 + 5) reference words; the mean of
  // per-utterance rates would be 86.7.
  EXPECT_NEAR(*t->get("table", "WER")->value, 50.0, 1e-9);
  EXPECT_EQ(*t->get("table", "Utterances")->value, 3.0);
  EXPECT_EQ(*t->get("table", "Skipped")->value, 0.0);
}

TEST(EvalAsr, PerfectHypothesesScoreZero) {
  test::TempDir dir;
  CorpusFiles files(dir.path());
  files.add("c", 'A', 0, 1, "Hello, there!");
  files.add("c", 'B', 2, 3, "general kenobi");
  const auto corpus = load_corpus(files.write());
  test::MockHarness h;
  protocol::InProcessWorker w(h.registry,
                              std::make_shared<TableAsr>(std::vector<std::string>{"hello there", "General Kenobi."}));
  const auto report = eval_asr(corpus, h.registry, no_judges({"table"}));
  EXPECT_DOUBLE_EQ(*report.find("asr")->get("table", "WER")->value, 0.0);
  EXPECT_DOUBLE_EQ(*report.find("asr")->get("table", "CER")->value, 0.0);
}

TEST(EvalAsr, ToyCorpusWithMocks) {
  test::MockHarness h;
  const auto corpus = load_corpus(SDS_TOY_CORPUS);
  EvalOptions o;
  const auto report = eval_asr(corpus, h.registry, o);
  const auto* t = report.find("asr");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->rows, (std::vector<std::string>{"echo-asr", "judge:mock-asr-judge"}));
  EXPECT_GT(*t->get("echo-asr", "WER")->value, 0.0);
  EXPECT_EQ(*t->get("echo-asr", "Utterances")->value, 9.0);
  EXPECT_EQ(t->get("echo-asr", "WER")->value, t->get("judge:mock-asr-judge", "WER")->value);
  ASSERT_EQ(report.notes.size(), 1u);
  EXPECT_NE(report.notes[0].find("toy-1 B [5.00, 5.60) line 6"), std::string::npos);
}

TEST(EvalAsr, WorkerFailuresAreCountedNotPooled) {
  test::TempDir dir;
  CorpusFiles files(dir.path());
  files.add("c", 'A', 0, 1, "one two");
  files.add("c", 'B', 2, 3, "three");
  const auto corpus = load_corpus(files.write());
  test::MockHarness h;
  auto asr = std::make_shared<TableAsr>(std::vector<std::string>{"one two", "three"});
  protocol::InProcessWorker w(h.registry, asr);
  h.registry.select_model(protocol::Task::Asr, "table");
  asr->fail_next_infer("gpu fell off");
  const auto report = eval_asr(corpus, h.registry, no_judges({"table"}));
  EXPECT_EQ(report.utterance_errors, 1u);
  EXPECT_EQ(*report.find("asr")->get("table", "Skipped")->value, 1.0);
  EXPECT_EQ(*report.find("asr")->get("table", "Utterances")->value, 1.0);
  EXPECT_DOUBLE_EQ(*report.find("asr")->get("table", "WER")->value, 0.0);
}

TEST(EvalAsr, MissingAudioFailsBeforeDispatch) {
  test::TempDir dir;
  CorpusFiles files(dir.path());
  files.add("c", 'A', 0, 1, "with audio");
  files.add("c", 'B', 2, 3, "without", false);
  const auto corpus = load_corpus(files.write());
  test::MockHarness h;
  EXPECT_EQ(code_of([&] { eval_asr(corpus, h.registry, {}); }), Errc::MissingAudio);
  EXPECT_EQ(h.mocks.handler("mock-asr")->infer_count(), 0);
}

TEST(EvalLlm, IdenticalInputsGiveFullSelfBleu) {
  std::string text;
  for (int i = 0; i < 4; ++i) text += line("c", i % 2 ? 'B' : 'A', i * 2.0, i * 2.0 + 1, "same words here");
  const auto corpus = parse(text);
  test::MockHarness h;
  const auto report = eval_llm(corpus, h.registry, TextSource{}, {});
  const auto* t = report.find("llm");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->columns, std::vector<std::string>{"template-llm"});
  EXPECT_NEAR(*t->get("Self BLEU-2", "template-llm")->value, 100.0, 1e-9);
  EXPECT_DOUBLE_EQ(*t->get("Auto BLEU-2", "template-llm")->value, 0.0);
  EXPECT_DOUBLE_EQ(*t->get("VERT", "template-llm")->value, 0.0);
  EXPECT_DOUBLE_EQ(*t->get("Perplexity", "template-llm")->value, 30.0);
  EXPECT_DOUBLE_EQ(*t->get("DialoGPT Perplexity", "template-llm")->value, 150.0);
  EXPECT_DOUBLE_EQ(*t->get("BERT Similarity", "template-llm")->value, 0.5);
  for (const char* row : {"Perplexity", "Self BLEU-2", "Auto BLEU-2", "VERT", "BERT Similarity", "DialoGPT Perplexity"}) {
    EXPECT_NE(std::find(t->rows.begin(), t->rows.end(), row), t->rows.end()) << row;
  }
}

TEST(EvalLlm, JudgesAbsentMeansSkipped) {
  const auto corpus = parse(line("c", 'A', 0, 1, "alpha beta") + line("c", 'B', 2, 3, "gamma delta"));
  test::MockHarness h(MockSetOptions{.quality_judge = false});
  const auto report = eval_llm(corpus, h.registry, TextSource{}, {});
  const auto* t = report.find("llm");
  EXPECT_EQ(t->get("Perplexity", "template-llm")->marker, kSkipped);
  EXPECT_TRUE(t->get("Self BLEU-2", "template-llm")->value);
}

TEST(EvalLlm, AsrSourceGivesPairedColumns) {
  test::MockHarness h;
  const auto report = eval_llm(load_corpus(SDS_TOY_CORPUS), h.registry, TextSource{"echo-asr"}, {});
  const auto* t = report.find("llm");
  EXPECT_EQ(t->columns, (std::vector<std::string>{"template-llm (Ground Truth)", "template-llm (ASR Transcript)"}));
  EXPECT_EQ(*t->get("Responses", "template-llm (Ground Truth)")->value, 9.0);
}

TEST(EvalTts, SkippedColumnsWithoutJudges) {
  const auto corpus = parse(line("c", 'A', 0, 1, "hello world") + line("c", 'B', 2, 3, "good day"));
  test::MockHarness h;
  const auto report = eval_tts(corpus, h.registry, TextSource{}, no_judges());
  const auto* t = report.find("tts");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->columns,
            (std::vector<std::string>{"WER", "CER", "UTMOS", "DNS Overall", "DNS P808", "PLCMOS", "SSQA"}));
  for (const auto& col : t->columns) EXPECT_EQ(t->get("tone-tts", col)->marker, kSkipped) << col;
}

TEST(EvalTts, MockJudgesGiveDeterministicValues) {
  const auto corpus = parse(line("c", 'A', 0, 1, "hello world") + line("c", 'B', 2, 3, "good day"));
  test::MockHarness h;
  const auto a = eval_tts(corpus, h.registry, TextSource{}, {});
  const auto b = eval_tts(corpus, h.registry, TextSource{}, {});
  EXPECT_EQ(render_report(a, Format::Json), render_report(b, Format::Json));
  const auto* t = a.find("tts");
  EXPECT_DOUBLE_EQ(*t->get("tone-tts", "UTMOS")->value, 4.0);
  EXPECT_GT(*t->get("tone-tts", "WER [mock-asr-judge]")->value, 0.0);

  const auto paired = eval_tts(corpus, h.registry, TextSource{"template-llm"}, {});
  EXPECT_EQ(paired.find("tts")->rows,
            (std::vector<std::string>{"tone-tts (GT transcript)", "tone-tts (LLM response)"}));
}

TEST(EvalTurnTaking, MatchesAnalyzer) {
  const auto corpus = parse(line("p", 'A', 0, 10, "one two") + line("p", 'A', 12, 20, "three") +
                            line("p", 'B', 25, 40, "yeah okay right"));
  const auto report = eval_turn_taking(corpus);
  const metrics::SpeechInterval iv[] = {
      {metrics::Channel::A, 0, 10}, {metrics::Channel::A, 12, 20}, {metrics::Channel::B, 25, 40}};
  const auto want = metrics::analyze_turn_taking(iv, 40.0);
  const auto* t = report.find("turn-taking:p");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->columns, (std::vector<std::string>{"Number of events / minute", "% Cumulated duration"}));
  EXPECT_EQ(t->rows, (std::vector<std::string>{"IPU", "Pause", "Gap", "Overlap"}));
  const std::pair<const char*, metrics::EventKind> rows[] = {{"IPU", metrics::EventKind::Ipu},
                                                            {"Pause", metrics::EventKind::Pause},
                                                            {"Gap", metrics::EventKind::Gap},
                                                            {"Overlap", metrics::EventKind::Overlap}};
  for (const auto& [row, kind] : rows) {
    EXPECT_DOUBLE_EQ(*t->get(row, "Number of events / minute")->value, want.stats(kind).events_per_minute);
    EXPECT_DOUBLE_EQ(*t->get(row, "% Cumulated duration")->value, want.stats(kind).cumulated_duration_pct);
  }
  const auto* s = report.find("turn-taking-summary");
  EXPECT_DOUBLE_EQ(*s->get("p", "Backchannel rate (/min)")->value, 3.0 / (40.0 / 60.0));
  EXPECT_DOUBLE_EQ(*s->get("p", "Speaking rate (words/min)")->value, 6.0 / (33.0 / 60.0));
}

TEST(EvalTurnTaking, AggregateOfIdenticalConversations) {
  std::string text;
  for (const char* id : {"c1", "c2"}) {
    text += line(id, 'A', 0, 4, "a") + line(id, 'B', 3, 7, "b") + line(id, 'A', 8, 9, "c");
  }
  const auto report = eval_turn_taking(parse(text));
  const auto* agg = report.find("turn-taking");
  const auto* one = report.find("turn-taking:c1");
  ASSERT_TRUE(agg && one);
  for (const auto& row : one->rows) {
    for (const auto& col : one->columns) {
      EXPECT_NEAR(*agg->get(row, col)->value, *one->get(row, col)->value, 1e-9) << row << col;
    }
  }
}

TEST(EvalTurnTaking, AggregateIsDurationWeighted) {
  const auto report = eval_turn_taking(
      parse(line("s", 'A', 0, 1, "x") + line("s", 'B', 2, 3, "y") + line("l", 'A', 0, 5, "x") + line("l", 'B', 5.5, 9, "y")));
  const double gap_s = *report.find("turn-taking:s")->get("Gap", "% Cumulated duration")->value;
  const double gap_l = *report.find("turn-taking:l")->get("Gap", "% Cumulated duration")->value;
  const double want = (gap_s * 3.0 + gap_l * 9.0) / 12.0;
  EXPECT_NEAR(*report.find("turn-taking")->get("Gap", "% Cumulated duration")->value, want, 1e-9);
}

TEST(EvalTurnTaking, SingleChannelRejected) {
  EXPECT_EQ(code_of([] { eval_turn_taking(parse(line("m", 'A', 0, 1, "solo") + line("m", 'A', 2, 3, "still"))); }),
            Errc::SingleChannel);
}

TEST(Report, RenderIsDeterministicAndRoundTrips) {
  test::MockHarness h;
  const auto corpus = load_corpus(SDS_TOY_CORPUS);
  auto report = eval_asr(corpus, h.registry, {});
  report.merge(eval_turn_taking(corpus));
  report.provenance = {"toy", digest("cfg"), "1.0.0"};
  const auto json = render_report(report, Format::Json);
  EXPECT_EQ(json, render_report(report, Format::Json));
  EXPECT_EQ(render_report(report, Format::Text), render_report(report, Format::Text));
  const auto back = parse_report_json(json);
  EXPECT_EQ(back, report);
  EXPECT_EQ(render_report(back, Format::Json), json);
  EXPECT_EQ(render_report(back, Format::Text), render_report(report, Format::Text));
  EXPECT_THROW(parse_report_json("[1,2"), Error);
}

TEST(Report, TextLayout) {
  EvalReport r;
  r.provenance = {"c.jsonl", "abc", "0.1"};
  Table t{"asr", "ASR", {"WER", "Utterances"}, {}, {}};
  t.set("m-b", "WER", Cell::of(12.345));
  t.set("m-b", "Utterances", Cell::count(9));
  t.set("m-a", "WER", Cell::mark(kSkipped));
  r.tables.push_back(t);
  r.notes = {"note one"};
  const auto text = render_report(r, Format::Text);
  EXPECT_NE(text.find("12.35"), std::string::npos);
  EXPECT_NE(text.find(" 9"), std::string::npos);
  EXPECT_EQ(text.find("9.00"), std::string::npos);
  EXPECT_NE(text.find("skipped"), std::string::npos);
  EXPECT_NE(text.find("== ASR =="), std::string::npos);
  EXPECT_NE(text.find("note one"), std::string::npos);
  // The missing Utterances cell for m-a renders as a dash.
  EXPECT_NE(text.find("-"), std::string::npos);
}

TEST(Report, EmptyReportIsHeaderOnly) {
  EvalReport r;
  r.provenance = {"none", "0", "0"};
  const auto text = render_report(r, Format::Text);
  EXPECT_NE(text.find("corpus: none"), std::string::npos);
  EXPECT_EQ(text.find("=="), std::string::npos);
  EXPECT_EQ(parse_report_json(render_report(r, Format::Json)), r);
}

TEST(Report, MergeDedupesNotes) {
  EvalReport a, b;
  a.notes = {"x"};
  a.utterance_errors = 1;
  b.notes = {"x", "y"};
  b.utterance_errors = 2;
  b.tables.push_back({"t", "T", {}, {}, {}});
  a.merge(b);
  EXPECT_EQ(a.notes, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(a.utterance_errors, 3u);
  EXPECT_TRUE(a.find("t"));
  EXPECT_EQ(digest("abc"), digest("abc"));
  EXPECT_EQ(digest("abc").size(), 16u);
  EXPECT_NE(digest("abc"), digest("abd"));
}

}  // namespace
}  // namespace sds::eval
