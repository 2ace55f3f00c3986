// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/eval/evaluators.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "sds/error.hpp"
#include "sds/eval/contexts.hpp"
#include "sds/metrics/alignment.hpp"
#include "sds/metrics/bleu.hpp"
#include "sds/metrics/judge.hpp"
#include "sds/metrics/turn_taking.hpp"
#include "sds/protocol/registry.hpp"

namespace sds::eval {

using protocol::Task;
using protocol::WorkerRegistry;

TextSource TextSource::parse(const std::string& value, const std::string& prefix) {
  if (value.empty() || value == "ground_truth") return {};
  const auto head = prefix + ":";
  if (value.size() > head.size() && value.compare(0, head.size(), head) == 0) {
    return TextSource{value.substr(head.size())};
  }
  throw Error(Errc::InvalidArgument, "expected ground_truth or " + head + "<model>, got '" + value + "'");
}

std::vector<CorpusUtterance> surviving_utterances(const Conversation& c) {
  return filter_contained(c.utterances);
}

namespace {

struct Pool {
  metrics::AlignmentCounts words, chars;
  std::size_t scored = 0;
  std::size_t failed = 0;

  void add(const std::string& ref_text, const std::string& hyp_text) {
    const auto ref = metrics::normalize_text(ref_text);
    const auto hyp = metrics::normalize_text(hyp_text);
    words += metrics::align(ref, hyp);
    chars += metrics::align_chars(metrics::character_sequence(ref), metrics::character_sequence(hyp));
    ++scored;
  }
};

Cell percent(const metrics::AlignmentCounts& c) {
  if (c.ref_len == 0) return Cell::mark("n/a");
  return Cell::of(100.0 * metrics::error_rate(c));
}

void set_pool(Table& t, const std::string& row, const std::string& wer_col, const std::string& cer_col,
              const Pool& p) {
  if (p.scored == 0) {
    t.set(row, wer_col, Cell::mark("error"));
    t.set(row, cer_col, Cell::mark("error"));
    return;
  }
  t.set(row, wer_col, percent(p.words));
  t.set(row, cer_col, percent(p.chars));
}

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    ++n;
  }
  Cell cell() const { return n ? Cell::of(sum / static_cast<double>(n)) : Cell::mark("error"); }
};

std::vector<std::string> models_of(WorkerRegistry& registry, Task task, const EvalOptions& options) {
  std::set<std::string> ids;
  for (const auto& [worker, model] : registry.models_for(task)) {
    if (options.models.empty() || options.models.count(model)) ids.insert(model);
  }
  return {ids.begin(), ids.end()};
}

std::vector<std::string> judges_of(WorkerRegistry& registry, std::string_view metric, const EvalOptions& options) {
  std::vector<std::string> out;
  for (auto& id : registry.judges_for(metric)) {
    if (!options.judges || options.judges->count(id)) out.push_back(std::move(id));
  }
  return out;
}

std::string metric_label(std::string_view metric) {
  static const std::map<std::string_view, std::string> labels{
      {"perplexity", "Perplexity"},
      {"bert_similarity", "BERT Similarity"},
      {"dialogpt_perplexity", "DialoGPT Perplexity"},
      {"utmos", "UTMOS"},
      {"dns_overall", "DNS Overall"},
      {"dns_p808", "DNS P808"},
      {"plcmos", "PLCMOS"},
      {"ssqa", "SSQA"},
  };
  const auto it = labels.find(metric);
  return it == labels.end() ? std::string(metric) : it->second;
}

std::string judge_label(std::string_view metric, const std::string& judge, std::size_t judge_count) {
  auto label = metric_label(metric);
  if (judge_count > 1) label += " [" + judge + "]";
  return label;
}

std::string key_of(const CorpusUtterance& u) { return u.conversation_id + "#" + std::to_string(u.line); }

std::string fmt_span(double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "[%.2f, %.2f)", a, b);
  return buf;
}

EvalReport base_report(const Corpus& corpus) {
  EvalReport r;
  r.provenance.corpus = corpus.path.generic_string();
  for (const auto& c : corpus.conversations) {
    const auto kept = surviving_utterances(c);
    for (const auto& u : c.utterances) {
      const bool survived = std::any_of(kept.begin(), kept.end(), [&](const auto& k) { return k.line == u.line; });
      if (!survived) {
        r.notes.push_back("dropped contained utterance " + c.id + " " + std::string(to_string(u.channel)) + " " +
                          fmt_span(u.start_s, u.end_s) + " line " + std::to_string(u.line));
      }
    }
  }
  return r;
}

struct Utterance {
  CorpusUtterance meta;
  audio::AudioBuffer audio;
};

std::vector<Utterance> load_survivor_audio(const Corpus& corpus) {
  std::vector<Utterance> out;
  for (const auto& c : corpus.conversations) {
    for (auto& u : surviving_utterances(c)) {
      if (!u.audio_path) {
        throw Error(Errc::MissingAudio, c.id + " line " + std::to_string(u.line) + " has no audio");
      }
      out.push_back({u, {}});
    }
  }
  for (auto& u : out) u.audio = load_utterance_audio(u.meta);
  return out;
}

std::string reply_text(const protocol::InferReply& reply) {
  const auto it = reply.body.find("text");
  if (it == reply.body.end() || !it->is_string()) throw Error(Errc::WorkerError, "reply carries no text");
  return it->get<std::string>();
}

void record_failure(EvalReport& r, const std::string& what, const std::exception& e) {
  ++r.utterance_errors;
  r.notes.push_back(what + ": " + e.what());
}

// Contexts of every conversation in corpus order.
std::vector<DialogueContext> all_contexts(const Corpus& corpus, const TextOf& text_of = {}) {
  std::vector<DialogueContext> out;
  for (const auto& c : corpus.conversations) {
    for (auto& ctx : build_dialogue_contexts(c, text_of)) out.push_back(std::move(ctx));
  }
  return out;
}

std::vector<std::string> generate_responses(WorkerRegistry& registry, const std::string& model,
                                            const std::vector<DialogueContext>& contexts,
                                            const EvalOptions& options, EvalReport& report,
                                            std::vector<const DialogueContext*>* answered = nullptr) {
  registry.select_model(Task::Llm, model, options.deadline);
  std::vector<std::string> out;
  for (const auto& ctx : contexts) {
    try {
      const auto reply = registry.dispatch_infer(
          Task::Llm, {{"context", ctx.context_text}, {"text", ctx.current_text}}, std::nullopt, options.deadline);
      out.push_back(reply_text(reply));
      if (answered) answered->push_back(&ctx);
    } catch (const std::exception& e) {
      record_failure(report, "llm " + model + " " + key_of(ctx.current), e);
    }
  }
  return out;
}

}  // namespace

EvalReport eval_asr(const Corpus& corpus, WorkerRegistry& registry, const EvalOptions& options) {
  auto report = base_report(corpus);
  const auto utterances = load_survivor_audio(corpus);
  Table t{"asr", "ASR: WER and CER (%) against ground truth", {}, {}, {}};
  t.columns = {"WER", "CER", "Utterances", "Skipped"};

  auto finish_row = [&](const std::string& row, const Pool& p) {
    set_pool(t, row, "WER", "CER", p);
    t.set(row, "Utterances", Cell::count(p.scored));
    t.set(row, "Skipped", Cell::count(p.failed));
  };

  for (const auto& model : models_of(registry, Task::Asr, options)) {
    registry.select_model(Task::Asr, model, options.deadline);
    Pool pool;
    for (const auto& u : utterances) {
      try {
        const auto reply = registry.dispatch_infer(Task::Asr, nlohmann::json::object(), u.audio, options.deadline);
        pool.add(u.meta.text, reply_text(reply));
      } catch (const std::exception& e) {
        ++pool.failed;
        record_failure(report, "asr " + model + " " + key_of(u.meta), e);
      }
    }
    finish_row(model, pool);
  }

  for (const auto& judge : judges_of(registry, metrics::kTranscriptMetric, options)) {
    Pool pool;
    for (const auto& u : utterances) {
      try {
        const auto reply = registry.dispatch_to(judge, {{"metric", metrics::kTranscriptMetric}}, u.audio,
                                                options.deadline);
        pool.add(u.meta.text, reply_text(reply));
      } catch (const std::exception& e) {
        ++pool.failed;
        record_failure(report, "judge " + judge + " " + key_of(u.meta), e);
      }
    }
    finish_row("judge:" + judge, pool);
  }
  report.tables.push_back(std::move(t));
  return report;
}

namespace {

inline const std::string kRowPerplexity = "Perplexity";
inline const std::string kRowSelfBleu = "Self BLEU-2";
inline const std::string kRowAutoBleu = "Auto BLEU-2";
inline const std::string kRowVert = "VERT";
inline const std::string kRowResponses = "Responses";

void score_responses(Table& t, const std::string& column, WorkerRegistry& registry,
                     const std::vector<std::string>& responses, const std::vector<const DialogueContext*>& contexts,
                     const EvalOptions& options, EvalReport& report) {
  auto judge_rows = [&](std::string_view metric) {
    const auto judges = judges_of(registry, metric, options);
    if (judges.empty()) {
      t.set(metric_label(metric), column, Cell::mark(kSkipped));
      return;
    }
    for (const auto& judge : judges) {
      Mean mean;
      for (std::size_t i = 0; i < responses.size(); ++i) {
        const nlohmann::json body{{"metric", metric},
                                  {"context", contexts[i]->context_text},
                                  {"response", responses[i]},
                                  {"user_text", contexts[i]->current_text}};
        try {
          const auto reply = registry.dispatch_to(judge, body, std::nullopt, options.deadline);
          const auto it = reply.body.find("value");
          if (it == reply.body.end() || !it->is_number()) throw Error(Errc::WorkerError, "reply carries no value");
          mean.add(it->get<double>());
        } catch (const std::exception& e) {
          record_failure(report, "judge " + judge + " " + std::string(metric) + " " + key_of(contexts[i]->current), e);
        }
      }
      t.set(judge_label(metric, judge, judges.size()), column, mean.cell());
    }
  };

  std::vector<metrics::TokenSequence> corpus;
  for (const auto& r : responses) {
    auto tokens = metrics::normalize_text(r);
    if (!tokens.empty()) corpus.push_back(std::move(tokens));
  }

  judge_rows("perplexity");
  std::optional<double> self, autob;
  if (corpus.size() >= 2) self = metrics::self_bleu2(corpus);
  if (!corpus.empty()) autob = metrics::auto_bleu2(corpus);
  t.set(kRowSelfBleu, column, self ? Cell::of(*self) : Cell::mark(kSkipped));
  t.set(kRowAutoBleu, column, autob ? Cell::of(*autob) : Cell::mark(kSkipped));
  t.set(kRowVert, column, self && autob ? Cell::of(metrics::vert(*self, *autob)) : Cell::mark(kSkipped));
  judge_rows("bert_similarity");
  judge_rows("dialogpt_perplexity");
  t.set(kRowResponses, column, Cell::count(responses.size()));
}

}  // namespace

EvalReport eval_llm(const Corpus& corpus, WorkerRegistry& registry, const TextSource& context_source,
                    const EvalOptions& options) {
  auto report = base_report(corpus);
  const auto gt_contexts = all_contexts(corpus);

  std::vector<DialogueContext> asr_contexts;
  if (!context_source.ground_truth()) {
    const auto utterances = load_survivor_audio(corpus);
    registry.select_model(Task::Asr, *context_source.model, options.deadline);
    std::map<std::string, std::string> transcripts;
    for (const auto& u : utterances) {
      try {
        const auto reply = registry.dispatch_infer(Task::Asr, nlohmann::json::object(), u.audio, options.deadline);
        transcripts[key_of(u.meta)] = reply_text(reply);
      } catch (const std::exception& e) {
        record_failure(report, "asr " + *context_source.model + " " + key_of(u.meta), e);
        transcripts[key_of(u.meta)] = "";
      }
    }
    asr_contexts = all_contexts(corpus, [&](const CorpusUtterance& u) { return transcripts.at(key_of(u)); });
    report.notes.push_back("contexts from asr:" + *context_source.model + " transcripts");
  }

  Table t{"llm", "LLM: text dialogue metrics", {}, {}, {}};
  for (const auto& model : models_of(registry, Task::Llm, options)) {
    auto run = [&](const std::vector<DialogueContext>& contexts, const std::string& column) {
      std::vector<const DialogueContext*> answered;
      const auto responses = generate_responses(registry, model, contexts, options, report, &answered);
      score_responses(t, column, registry, responses, answered, options, report);
    };
    if (context_source.ground_truth()) {
      run(gt_contexts, model);
    } else {
      run(gt_contexts, model + " (Ground Truth)");
      run(asr_contexts, model + " (ASR Transcript)");
    }
  }
  report.tables.push_back(std::move(t));
  return report;
}

EvalReport eval_tts(const Corpus& corpus, WorkerRegistry& registry, const TextSource& input_source,
                    const EvalOptions& options) {
  auto report = base_report(corpus);
  struct Input {
    std::string key;
    std::string text;
  };
  std::vector<std::pair<std::string, std::vector<Input>>> input_sets;
  {
    std::vector<Input> gt;
    for (const auto& c : corpus.conversations) {
      for (const auto& u : surviving_utterances(c)) {
        if (!metrics::normalize_text(u.text).empty()) gt.push_back({key_of(u), u.text});
      }
    }
    input_sets.emplace_back("GT transcript", std::move(gt));
  }
  if (!input_source.ground_truth()) {
    const auto contexts = all_contexts(corpus);
    std::vector<const DialogueContext*> answered;
    const auto responses = generate_responses(registry, *input_source.model, contexts, options, report, &answered);
    std::vector<Input> llm;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      if (!metrics::normalize_text(responses[i]).empty()) llm.push_back({key_of(answered[i]->current), responses[i]});
    }
    input_sets.emplace_back("LLM response", std::move(llm));
    report.notes.push_back("inputs from llm:" + *input_source.model + " responses");
  }

  const auto transcribers = judges_of(registry, metrics::kTranscriptMetric, options);
  std::map<std::string, std::vector<std::string>> quality_judges;
  for (const auto metric : metrics::kAudioQualityMetrics) {
    quality_judges[std::string(metric)] = judges_of(registry, metric, options);
  }

  Table t{"tts", "TTS: intelligibility (WER/CER %) and speech quality", {}, {}, {}};
  if (transcribers.empty()) {
    t.columns = {"WER", "CER"};
  } else {
    for (const auto& j : transcribers) {
      t.columns.push_back("WER [" + j + "]");
      t.columns.push_back("CER [" + j + "]");
    }
  }
  for (const auto metric : metrics::kAudioQualityMetrics) {
    const auto& judges = quality_judges[std::string(metric)];
    if (judges.empty()) t.columns.push_back(metric_label(metric));
    for (const auto& j : judges) t.columns.push_back(judge_label(metric, j, judges.size()));
  }

  for (const auto& model : models_of(registry, Task::Tts, options)) {
    registry.select_model(Task::Tts, model, options.deadline);
    for (const auto& [kind, inputs] : input_sets) {
      const auto row = input_source.ground_truth() ? model : model + " (" + kind + ")";
      std::vector<Pool> pools(transcribers.size());
      std::map<std::string, Mean> quality;
      for (const auto& in : inputs) {
        std::optional<audio::AudioBuffer> speech;
        try {
          const auto reply = registry.dispatch_infer(Task::Tts, {{"text", in.text}}, std::nullopt, options.deadline);
          if (!reply.audio || reply.audio->samples.empty()) throw Error(Errc::WorkerError, "reply carries no audio");
          speech = reply.audio;
        } catch (const std::exception& e) {
          record_failure(report, "tts " + model + " " + in.key, e);
          continue;
        }
        for (std::size_t j = 0; j < transcribers.size(); ++j) {
          try {
            const auto reply = registry.dispatch_to(transcribers[j], {{"metric", metrics::kTranscriptMetric}},
                                                    speech, options.deadline);
            pools[j].add(in.text, reply_text(reply));
          } catch (const std::exception& e) {
            record_failure(report, "judge " + transcribers[j] + " " + in.key, e);
          }
        }
        for (const auto& [metric, judges] : quality_judges) {
          for (const auto& judge : judges) {
            const nlohmann::json body{{"metric", metric}, {"context", ""}, {"response", in.text}};
            try {
              const auto reply = registry.dispatch_to(judge, body, speech, options.deadline);
              const auto it = reply.body.find("value");
              if (it == reply.body.end() || !it->is_number()) throw Error(Errc::WorkerError, "reply carries no value");
              quality[judge_label(metric, judge, judges.size())].add(it->get<double>());
            } catch (const std::exception& e) {
              record_failure(report, "judge " + judge + " " + metric + " " + in.key, e);
            }
          }
        }
      }
      if (transcribers.empty()) {
        t.set(row, "WER", Cell::mark(kSkipped));
        t.set(row, "CER", Cell::mark(kSkipped));
      }
      for (std::size_t j = 0; j < transcribers.size(); ++j) {
        set_pool(t, row, "WER [" + transcribers[j] + "]", "CER [" + transcribers[j] + "]", pools[j]);
      }
      for (const auto metric : metrics::kAudioQualityMetrics) {
        const auto& judges = quality_judges[std::string(metric)];
        if (judges.empty()) t.set(row, metric_label(metric), Cell::mark(kSkipped));
        for (const auto& j : judges) {
          const auto label = judge_label(metric, j, judges.size());
          t.set(row, label, quality[label].cell());
        }
      }
    }
  }
  report.tables.push_back(std::move(t));
  return report;
}

namespace {

inline const std::string kColRate = "Number of events / minute";
inline const std::string kColPct = "% Cumulated duration";

std::string event_label(metrics::EventKind k) {
  switch (k) {
    case metrics::EventKind::Ipu: return "IPU";
    case metrics::EventKind::Pause: return "Pause";
    case metrics::EventKind::Gap: return "Gap";
    case metrics::EventKind::Overlap: return "Overlap";
  }
  return "?";
}

Table event_table(const std::string& name, const std::string& title, const metrics::TurnTakingReport& r) {
  Table t{name, title, {kColRate, kColPct}, {}, {}};
  for (const auto k : metrics::kEventKinds) {
    t.set(event_label(k), kColRate, Cell::of(r.stats(k).events_per_minute));
    t.set(event_label(k), kColPct, Cell::of(r.stats(k).cumulated_duration_pct));
  }
  return t;
}

}  // namespace

EvalReport eval_turn_taking(const Corpus& corpus, const EvalOptions& options) {
  EvalReport report;
  report.provenance.corpus = corpus.path.generic_string();
  const auto& lexicon = options.lexicon ? *options.lexicon : metrics::BackchannelLexicon::default_lexicon();

  Table summary{"turn-taking-summary", "Turn-taking summary", {}, {}, {}};
  summary.columns = {"Duration (s)", "Speaking rate (words/min)", "Backchannel rate (/min)"};

  double total_s = 0.0;
  std::map<metrics::EventKind, std::pair<std::size_t, double>> totals;  // count, seconds
  std::vector<metrics::SpokenTurn> all_turns;
  std::vector<metrics::TokenSequence> all_transcripts;
  std::vector<Table> per_conversation;

  for (const auto& c : corpus.conversations) {
    if (!c.has_both_channels()) {
      throw Error(Errc::SingleChannel, "conversation " + c.id + " has a single channel");
    }
    std::vector<metrics::SpeechInterval> intervals;
    std::vector<metrics::SpokenTurn> turns;
    std::vector<metrics::TokenSequence> transcripts;
    for (const auto& u : c.utterances) {
      intervals.push_back({u.channel, u.start_s, u.end_s});
      auto tokens = metrics::normalize_text(u.text);
      turns.push_back({tokens.size(), u.end_s - u.start_s});
      transcripts.push_back(std::move(tokens));
    }
    const double duration = c.duration_s();
    const auto r = metrics::analyze_turn_taking(intervals, duration);
    per_conversation.push_back(event_table("turn-taking:" + c.id, "Turn-taking events: " + c.id, r));

    const double rate = metrics::speaking_rate(turns);
    const double bc = metrics::backchannel_rate(transcripts, duration / 60.0, lexicon);
    summary.set(c.id, "Duration (s)", Cell::of(duration));
    summary.set(c.id, "Speaking rate (words/min)", Cell::of(rate));
    summary.set(c.id, "Backchannel rate (/min)", Cell::of(bc));

    total_s += duration;
    for (const auto k : metrics::kEventKinds) {
      totals[k].first += r.stats(k).count;
      totals[k].second += r.stats(k).duration_s;
    }
    all_turns.insert(all_turns.end(), turns.begin(), turns.end());
    for (auto& tr : transcripts) all_transcripts.push_back(std::move(tr));
  }

  if (total_s > 0.0) {
    // Duration-weighted means of the per-conversation rates and shares.
    metrics::TurnTakingReport agg;
    agg.total_duration_s = total_s;
    for (const auto k : metrics::kEventKinds) {
      auto& s = agg.stats(k);
      s.count = totals[k].first;
      s.duration_s = totals[k].second;
      s.events_per_minute = static_cast<double>(s.count) / (total_s / 60.0);
      s.cumulated_duration_pct = 100.0 * s.duration_s / total_s;
    }
    report.tables.push_back(event_table("turn-taking", "Turn-taking events: all conversations", agg));
    summary.set("all", "Duration (s)", Cell::of(total_s));
    summary.set("all", "Speaking rate (words/min)", Cell::of(metrics::speaking_rate(all_turns)));
    summary.set("all", "Backchannel rate (/min)",
                Cell::of(metrics::backchannel_rate(all_transcripts, total_s / 60.0, lexicon)));
  }
  for (auto& t : per_conversation) report.tables.push_back(std::move(t));
  report.tables.push_back(std::move(summary));
  return report;
}

}  // namespace sds::eval
