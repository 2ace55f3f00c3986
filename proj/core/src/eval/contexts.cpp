// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/eval/contexts.hpp"

namespace sds::eval {

bool contains(const CorpusUtterance& outer, const CorpusUtterance& inner) noexcept {
  return outer.start_s <= inner.start_s && inner.end_s <= outer.end_s;
}

std::vector<CorpusUtterance> filter_contained(const std::vector<CorpusUtterance>& utterances) {
  std::vector<CorpusUtterance> out;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const auto& u = utterances[i];
    bool dropped = false;
    for (std::size_t j = 0; j < utterances.size() && !dropped; ++j) {
      if (i == j) continue;
      const auto& v = utterances[j];
      if (!contains(v, u)) continue;
      const bool same_span = v.start_s == u.start_s && v.end_s == u.end_s;
      dropped = !same_span || v.line < u.line;
    }
    if (!dropped) out.push_back(u);
  }
  return out;
}

std::vector<DialogueContext> build_dialogue_contexts(const Conversation& conversation, const TextOf& text_of) {
  const auto survivors = filter_contained(conversation.utterances);
  auto text = [&](const CorpusUtterance& u) { return text_of ? text_of(u) : u.text; };

  std::vector<DialogueContext> out;
  for (const auto& cur : survivors) {
    DialogueContext ctx;
    ctx.current = cur;
    ctx.current_text = text(cur);
    for (const auto& prev : survivors) {
      if (!(prev.start_s < cur.start_s)) continue;
      ctx.context_text += prev.channel == cur.channel ? "User: " : "Assistant: ";
      ctx.context_text += text(prev);
      ctx.context_text += '\n';
    }
    ctx.context_text += "User: " + ctx.current_text;
    out.push_back(std::move(ctx));
  }
  return out;
}

}  // namespace sds::eval
