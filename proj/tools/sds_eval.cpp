// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

// Batch evaluation over a timestamped conversation corpus.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "sds/error.hpp"
#include "sds/eval/evaluators.hpp"
#include "sds/protocol/mock_workers.hpp"
#include "sds/protocol/registry.hpp"

namespace {

struct Args {
  std::string command;
  std::string corpus;
  std::string context_source = "ground_truth";
  std::string input_source = "ground_truth";
  std::string judges = "all";
  std::string models;
  std::string out;
  std::string format = "text";
  std::string lexicon;
  bool allow_partial = false;
  bool no_mocks = false;
  int worker_port = -1;
  int expect_workers = 0;
  int deadline_ms = 10000;
};

std::set<std::string> split_list(const std::string& s) {
  std::set<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ",") + i;
  return out;
}

// Everything that changes the numbers, in a fixed order.
std::string config_string(const Args& a, sds::protocol::WorkerRegistry& registry) {
  std::string s = "command=" + a.command + ";context=" + a.context_source + ";input=" + a.input_source +
                  ";judges=" + a.judges + ";models=" + join(split_list(a.models)) + ";lexicon=" + a.lexicon +
                  ";workers=";
  for (const auto& w : registry.workers()) {
    s += w.worker_id + "(";
    for (const auto& m : w.models) s += m + " ";
    for (const auto& m : w.judge_metrics) s += m + " ";
    s += ")";
  }
  return s;
}

int run(const Args& a) {
  using namespace sds;
  protocol::WorkerRegistry registry(std::chrono::milliseconds(a.deadline_ms));
  std::unique_ptr<protocol::mock::MockWorkerSet> mocks;
  if (!a.no_mocks) mocks = std::make_unique<protocol::mock::MockWorkerSet>(registry);
  std::unique_ptr<protocol::WorkerListener> listener;
  if (a.worker_port >= 0) {
    listener = std::make_unique<protocol::WorkerListener>(registry, static_cast<std::uint16_t>(a.worker_port));
    std::cerr << "sds-eval: accepting workers on port " << listener->port() << "\n";
    const auto want = registry.size() + static_cast<std::size_t>(a.expect_workers);
    if (!registry.wait_for_workers(want, std::chrono::seconds(60))) {
      throw Error(Errc::WorkerTimeout, "expected workers did not connect");
    }
  }

  eval::EvalOptions options;
  options.models = split_list(a.models);
  if (a.judges == "none") {
    options.judges = std::set<std::string>{};
  } else if (a.judges != "all") {
    options.judges = split_list(a.judges);
  }
  options.deadline = std::chrono::milliseconds(a.deadline_ms);
  std::optional<metrics::BackchannelLexicon> lexicon;
  if (!a.lexicon.empty()) {
    lexicon = metrics::BackchannelLexicon::from_file(a.lexicon);
    options.lexicon = &*lexicon;
  }

  const auto corpus = eval::load_corpus(a.corpus);
  const auto context = eval::TextSource::parse(a.context_source, "asr");
  const auto input = eval::TextSource::parse(a.input_source, "llm");

  eval::EvalReport report;
  report.provenance.corpus = corpus.path.generic_string();
  const bool all = a.command == "all";
  if (all || a.command == "asr") report.merge(eval::eval_asr(corpus, registry, options));
  if (all || a.command == "llm") report.merge(eval::eval_llm(corpus, registry, context, options));
  if (all || a.command == "tts") report.merge(eval::eval_tts(corpus, registry, input, options));
  if (all || a.command == "turn-taking") report.merge(eval::eval_turn_taking(corpus, options));
  report.provenance.config_digest = eval::digest(config_string(a, registry));
  report.provenance.tool_version = SDS_VERSION;

  const auto text = eval::render_report(report, a.format == "json" ? eval::Format::Json : eval::Format::Text);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(a.out, std::ios::binary);
    out << text;
    if (!out) throw Error(Errc::IoFailure, "cannot write " + a.out);
  }
  if (report.utterance_errors > 0) {
    std::cerr << "sds-eval: " << report.utterance_errors << " utterance-level error(s)\n";
    if (!a.allow_partial) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch evaluation of dialogue pipelines on a conversation corpus"};
  app.require_subcommand(1, 1);
  Args args;

  for (const char* name : {"asr", "llm", "tts", "turn-taking", "all"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--corpus", args.corpus, "JSON-lines corpus file")->required()->check(CLI::ExistingFile);
    sub->add_option("--context-source", args.context_source, "ground_truth or asr:<model>");
    sub->add_option("--input-source", args.input_source, "ground_truth or llm:<model>");
    sub->add_option("--judges", args.judges, "all, none, or comma-separated judge worker ids");
    sub->add_option("--models", args.models, "comma-separated model ids (default: all)");
    sub->add_option("--out", args.out, "write the report here instead of stdout");
    sub->add_option("--format", args.format)->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--backchannels", args.lexicon, "backchannel phrase file");
    sub->add_flag("--allow-partial", args.allow_partial, "exit 0 despite utterance-level errors");
    sub->add_flag("--no-mocks", args.no_mocks, "do not start the in-process mock workers");
    sub->add_option("--worker-port", args.worker_port, "accept external workers on this TCP port");
    sub->add_option("--expect-workers", args.expect_workers, "wait for this many external workers");
    sub->add_option("--deadline-ms", args.deadline_ms, "per-request worker deadline");
    sub->callback([&args, sub] { args.command = sub->get_name(); });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    return run(args);
  } catch (const std::exception& e) {
    std::cerr << "sds-eval: " << e.what() << "\n";
    return 2;
  }
}
