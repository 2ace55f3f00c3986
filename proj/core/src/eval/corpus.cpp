// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/eval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "sds/error.hpp"
#include "sds/wav.hpp"

namespace sds::eval {

double Conversation::duration_s() const noexcept {
  double end = 0.0;
  for (const auto& u : utterances) end = std::max(end, u.end_s);
  return end;
}

bool Conversation::has_both_channels() const noexcept {
  bool a = false, b = false;
  for (const auto& u : utterances) (u.channel == Channel::A ? a : b) = true;
  return a && b;
}

std::size_t Corpus::utterance_count() const noexcept {
  std::size_t n = 0;
  for (const auto& c : conversations) n += c.utterances.size();
  return n;
}

namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

CorpusUtterance parse_line(const std::string& text, std::size_t line, const std::filesystem::path& base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, at_line(line) + e.what());
  }
  CorpusUtterance u;
  u.line = line;
  try {
    u.conversation_id = j.at("conversation_id").get<std::string>();
    const auto ch = j.at("channel").get<std::string>();
    if (ch == "A") {
      u.channel = Channel::A;
    } else if (ch == "B") {
      u.channel = Channel::B;
    } else {
      throw Error(Errc::InvariantViolation, at_line(line) + "channel must be A or B");
    }
    u.start_s = j.at("start_s").get<double>();
    u.end_s = j.at("end_s").get<double>();
    u.text = j.value("text", std::string());
    if (j.contains("audio_path") && !j["audio_path"].is_null()) {
      std::filesystem::path p = j["audio_path"].get<std::string>();
      u.audio_path = p.is_absolute() || base.empty() ? p : base / p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, at_line(line) + e.what());
  }
  if (u.conversation_id.empty()) throw Error(Errc::InvariantViolation, at_line(line) + "empty conversation_id");
  if (u.start_s < 0.0) throw Error(Errc::InvariantViolation, at_line(line) + "negative start_s");
  if (!(u.end_s > u.start_s)) throw Error(Errc::InvariantViolation, at_line(line) + "end_s must exceed start_s");
  if (u.text.empty() && !u.audio_path) {
    throw Error(Errc::InvariantViolation, at_line(line) + "empty text needs an audio_path");
  }
  return u;
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::filesystem::path& base_dir) {
  std::map<std::string, Conversation> grouped;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto u = parse_line(text, line, base_dir);
    auto& conv = grouped[u.conversation_id];
    conv.id = u.conversation_id;
    conv.utterances.push_back(std::move(u));
  }
  Corpus corpus;
  for (auto& [id, conv] : grouped) {
    std::stable_sort(conv.utterances.begin(), conv.utterances.end(),
                     [](const CorpusUtterance& a, const CorpusUtterance& b) { return a.start_s < b.start_s; });
    corpus.conversations.push_back(std::move(conv));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open corpus " + path.string());
  auto corpus = parse_corpus(in, path.parent_path());
  corpus.path = path;
  return corpus;
}

audio::AudioBuffer load_utterance_audio(const CorpusUtterance& u) {
  if (!u.audio_path) {
    throw Error(Errc::MissingAudio, u.conversation_id + " line " + std::to_string(u.line) + " has no audio");
  }
  return wav::read_file(*u.audio_path);
}

}  // namespace sds::eval
