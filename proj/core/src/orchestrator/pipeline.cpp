// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/orchestrator/pipeline.hpp"

#include "sds/error.hpp"

namespace sds::orch {

std::string_view to_string(Mode m) noexcept { return m == Mode::Cascaded ? "cascaded" : "e2e"; }

void PipelineConfig::validate() const {
  if (mode == Mode::Cascaded) {
    if (!asr_model || !llm_model || !tts_model) {
      throw Error(Errc::InvalidArgument, "cascaded config needs asr, llm and tts models");
    }
    if (e2e_model) throw Error(Errc::InvalidArgument, "cascaded config must not name an e2e model");
  } else {
    if (!e2e_model) throw Error(Errc::InvalidArgument, "e2e config needs an e2e model");
    if (asr_model || llm_model || tts_model) {
      throw Error(Errc::InvalidArgument, "e2e config must not name stage models");
    }
  }
  vad.validate();
}

PipelineConfig PipelineConfig::cascaded(std::string asr, std::string llm, std::string tts) {
  PipelineConfig c;
  c.mode = Mode::Cascaded;
  c.asr_model = std::move(asr);
  c.llm_model = std::move(llm);
  c.tts_model = std::move(tts);
  return c;
}

PipelineConfig PipelineConfig::e2e(std::string model) {
  PipelineConfig c;
  c.mode = Mode::E2e;
  c.e2e_model = std::move(model);
  return c;
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = nlohmann::json{{"mode", to_string(c.mode)}};
  if (c.asr_model) j["asr_model"] = *c.asr_model;
  if (c.llm_model) j["llm_model"] = *c.llm_model;
  if (c.tts_model) j["tts_model"] = *c.tts_model;
  if (c.e2e_model) j["e2e_model"] = *c.e2e_model;
  j["vad"] = {{"frame_ms", c.vad.frame_ms},
              {"energy_floor_dbfs", c.vad.energy_floor_dbfs},
              {"activation_ratio", c.vad.activation_ratio},
              {"onset_frames", c.vad.onset_frames},
              {"hangover_frames", c.vad.hangover_frames}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  try {
    if (!j.is_object()) throw Error(Errc::InvalidArgument, "config must be an object");
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "cascaded") {
      c.mode = Mode::Cascaded;
    } else if (mode == "e2e") {
      c.mode = Mode::E2e;
    } else {
      throw Error(Errc::InvalidArgument, "unknown mode '" + mode + "'");
    }
    auto opt = [&](const char* key) -> std::optional<std::string> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<std::string>();
    };
    c.asr_model = opt("asr_model");
    c.llm_model = opt("llm_model");
    c.tts_model = opt("tts_model");
    c.e2e_model = opt("e2e_model");
    c.vad = {};
    if (j.contains("vad")) {
      const auto& v = j["vad"];
      c.vad.frame_ms = v.value("frame_ms", c.vad.frame_ms);
      c.vad.energy_floor_dbfs = v.value("energy_floor_dbfs", c.vad.energy_floor_dbfs);
      c.vad.activation_ratio = v.value("activation_ratio", c.vad.activation_ratio);
      c.vad.onset_frames = v.value("onset_frames", c.vad.onset_frames);
      c.vad.hangover_frames = v.value("hangover_frames", c.vad.hangover_frames);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("bad pipeline config: ") + e.what());
  }
  c.validate();
}

void to_json(nlohmann::json& j, const LatencyBreakdown& l) {
  j = nlohmann::json::object();
  if (l.asr_ms) j["asr_ms"] = *l.asr_ms;
  if (l.llm_ms) j["llm_ms"] = *l.llm_ms;
  if (l.tts_ms) j["tts_ms"] = *l.tts_ms;
  if (l.e2e_ms) j["e2e_ms"] = *l.e2e_ms;
  j["total_ms"] = l.total_ms;
}

nlohmann::json turn_summary(const TurnRecord& t) {
  nlohmann::json j{{"turn_id", t.turn_id},
                   {"mode", to_string(t.mode)},
                   {"user_start_s", t.user_segment.start_s},
                   {"user_end_s", t.user_segment.end_s},
                   {"response_text", t.response_text},
                   {"response_samples", t.response_audio.samples.size()},
                   {"sample_rate_hz", t.response_audio.format.sample_rate_hz},
                   {"latency", t.latency},
                   {"interrupted", t.interrupted},
                   {"failed", t.failed}};
  if (t.asr_text) j["asr_text"] = *t.asr_text;
  if (t.failed) j["error"] = t.error;
  return j;
}

std::string build_llm_context(std::span<const TurnRecord> history, const std::string& current) {
  std::string out;
  for (const auto& t : history) {
    if (t.failed) continue;
    out += "User: " + t.asr_text.value_or("") + "\n";
    out += "Assistant: " + t.response_text + "\n";
  }
  out += "User: " + current;
  return out;
}

}  // namespace sds::orch
