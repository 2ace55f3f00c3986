// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/metrics/turn_taking.hpp"

#include <algorithm>
#include <utility>

#include "sds/error.hpp"

namespace sds::metrics {

std::string_view to_string(Channel c) noexcept { return c == Channel::A ? "A" : "B"; }

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::Ipu: return "IPU";
    case EventKind::Pause: return "Pause";
    case EventKind::Gap: return "Gap";
    case EventKind::Overlap: return "Overlap";
  }
  return "?";
}

const EventStats& TurnTakingReport::stats(EventKind k) const noexcept {
  switch (k) {
    case EventKind::Ipu: return ipu;
    case EventKind::Pause: return pause;
    case EventKind::Gap: return gap;
    case EventKind::Overlap: return overlap;
  }
  return ipu;
}

EventStats& TurnTakingReport::stats(EventKind k) noexcept {
  return const_cast<EventStats&>(std::as_const(*this).stats(k));
}

namespace {

struct Span {
  double start, end;
};

// Sorted union of possibly overlapping spans, joining touching spans and
// those closer than gap.
std::vector<Span> merge(std::vector<Span> spans, double gap) {
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  std::vector<Span> out;
  for (const auto& s : spans) {
    if (!out.empty() && (s.start <= out.back().end || s.start - out.back().end < gap)) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<Span> spans_of(std::span<const SpeechInterval> intervals, Channel channel) {
  std::vector<Span> out;
  for (const auto& iv : intervals) {
    if (iv.channel == channel) out.push_back({iv.start_s, iv.end_s});
  }
  return out;
}

std::vector<Span> intersect(const std::vector<Span>& a, const std::vector<Span>& b) {
  std::vector<Span> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].start, b[j].start);
    const double hi = std::min(a[i].end, b[j].end);
    if (lo < hi) out.push_back({lo, hi});
    (a[i].end < b[j].end) ? ++i : ++j;
  }
  return merge(std::move(out), 0.0);
}

double total_length(const std::vector<Span>& spans) {
  double sum = 0.0;
  for (const auto& s : spans) sum += s.end - s.start;
  return sum;
}

bool ends_at(const std::vector<Span>& spans, double t) {
  return std::any_of(spans.begin(), spans.end(), [t](const Span& s) { return s.end == t; });
}

bool starts_at(const std::vector<Span>& spans, double t) {
  return std::any_of(spans.begin(), spans.end(), [t](const Span& s) { return s.start == t; });
}

void finish(EventStats& e, double total) {
  e.events_per_minute = static_cast<double>(e.count) / (total / 60.0);
  e.cumulated_duration_pct = e.duration_s / total * 100.0;
}

}  // namespace

std::vector<SpeechInterval> merge_channel(std::span<const SpeechInterval> intervals, Channel channel,
                                          double merge_gap_s) {
  std::vector<SpeechInterval> out;
  for (const auto& s : merge(spans_of(intervals, channel), merge_gap_s)) {
    out.push_back({channel, s.start, s.end});
  }
  return out;
}

TurnTakingReport analyze_turn_taking(std::span<const SpeechInterval> intervals,
                                     double total_duration_s, double merge_gap_s) {
  if (!(total_duration_s > 0.0)) throw Error(Errc::ZeroDuration, "window must be positive");
  for (const auto& iv : intervals) {
    if (!(iv.end_s > iv.start_s)) throw Error(Errc::NegativeDuration, "interval end <= start");
    if (iv.start_s < 0.0 || iv.end_s > total_duration_s) {
      throw Error(Errc::IntervalOutOfRange, "interval outside the conversation window");
    }
  }

  const auto a = merge(spans_of(intervals, Channel::A), merge_gap_s);
  const auto b = merge(spans_of(intervals, Channel::B), merge_gap_s);

  TurnTakingReport r;
  r.total_duration_s = total_duration_s;
  r.ipu.count = a.size() + b.size();
  r.ipu.duration_s = total_length(a) + total_length(b);

  const auto both = intersect(a, b);
  r.overlap.count = both.size();
  r.overlap.duration_s = total_length(both);

  std::vector<Span> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const auto active = merge(std::move(all), 0.0);
  const double union_s = total_length(active);

  double edge_s = 0.0;
  if (active.empty()) {
    edge_s = total_duration_s;
  } else {
    edge_s = active.front().start + (total_duration_s - active.back().end);
    for (std::size_t k = 1; k < active.size(); ++k) {
      const double s = active[k - 1].end, e = active[k].start;
      const bool same = (ends_at(a, s) && starts_at(a, e)) || (ends_at(b, s) && starts_at(b, e));
      auto& ev = same ? r.pause : r.gap;
      ++ev.count;
      ev.duration_s += e - s;
    }
  }

  for (const auto k : kEventKinds) finish(r.stats(k), total_duration_s);
  r.union_speech_pct = union_s / total_duration_s * 100.0;
  r.solo_speech_pct = (union_s - r.overlap.duration_s) / total_duration_s * 100.0;
  r.edge_silence_pct = edge_s / total_duration_s * 100.0;
  return r;
}

}  // namespace sds::metrics
