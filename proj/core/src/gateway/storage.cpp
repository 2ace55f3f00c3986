// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/gateway/storage.hpp"

#include <fstream>

#include <unistd.h>

#include "sds/error.hpp"
#include "sds/wav.hpp"

namespace sds::gateway {

namespace fs = std::filesystem;

namespace {

bool safe_component(const std::string& s) {
  if (s.empty() || s == "." || s == "..") return false;
  for (const char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

void write_atomically(const fs::path& path, std::string_view bytes) {
  const auto tmp = path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot create " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::IoFailure, "cannot rename into " + path.string());
  }
}

std::string render_session_log(const SessionSnapshot& s, const FeedbackScales& scales) {
  std::string out;
  for (const auto& t : s.turns) {
    auto line = orch::turn_summary(t);
    line["session_id"] = s.session_id;
    line["config"] = s.config;
    auto metrics = nlohmann::json::array();
    for (const auto& m : s.metrics) {
      if (m.turn_id == t.turn_id) metrics.push_back(m);
    }
    line["metrics"] = std::move(metrics);
    auto feedback = nlohmann::json::array();
    for (const auto& f : s.feedback) {
      if (f.turn_id == t.turn_id) feedback.push_back(to_json(f, scales));
    }
    line["feedback"] = std::move(feedback);
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<fs::path> persist_session(const SessionSnapshot& s, const StorageConfig& cfg,
                                      const FeedbackScales& scales) {
  if (!cfg.enabled) throw Error(Errc::StorageDisabled, "session storage is disabled");
  if (!safe_component(s.session_id)) throw Error(Errc::InvalidArgument, "unsafe session id '" + s.session_id + "'");

  const auto dir = cfg.root_path / s.session_id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<fs::path> written;
  const auto log = dir / "session.jsonl";
  write_atomically(log, render_session_log(s, scales));
  written.push_back(log);

  if (cfg.store_audio) {
    auto store = [&](const fs::path& path, const audio::AudioBuffer& audio) {
      if (audio.empty() || fs::exists(path)) return;
      const auto bytes = wav::encode(audio);
      write_atomically(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      written.push_back(path);
    };
    for (const auto& t : s.turns) {
      const auto stem = "turn_" + std::to_string(t.turn_id);
      store(dir / (stem + "_user.wav"), t.user_segment.audio());
      store(dir / (stem + "_system.wav"), t.response_audio);
    }
  }
  return written;
}

}  // namespace sds::gateway
