// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sds/error.hpp"

namespace sds::audio {

void validate(const AudioFormat& format) {
  switch (format.sample_rate_hz) {
    case 8000:
    case 16000:
    case 32000:
    case 48000:
      break;
    default:
      throw Error(Errc::UnsupportedFormat,
                  "sample rate " + std::to_string(format.sample_rate_hz) + " Hz");
  }
  if (format.channels != 1) {
    throw Error(Errc::UnsupportedFormat, std::to_string(format.channels) + " channels");
  }
}

bool is_supported_frame_ms(int frame_ms) noexcept {
  return frame_ms == 10 || frame_ms == 20 || frame_ms == 30;
}

std::size_t samples_per_frame(const AudioFormat& format, int frame_ms) {
  if (!is_supported_frame_ms(frame_ms)) {
    throw Error(Errc::UnsupportedFormat, "frame_ms " + std::to_string(frame_ms));
  }
  return static_cast<std::size_t>(format.sample_rate_hz / 1000 * frame_ms);
}

std::vector<AudioFrame> frame_audio(std::span<const std::int16_t> stream, const AudioFormat& format,
                                    int frame_ms) {
  validate(format);
  if (stream.empty()) throw Error(Errc::InvalidArgument, "empty stream");
  Framer framer(format, frame_ms);
  auto frames = framer.push(stream);
  auto tail = framer.flush();
  frames.insert(frames.end(), std::make_move_iterator(tail.begin()),
                std::make_move_iterator(tail.end()));
  return frames;
}

Framer::Framer(AudioFormat format, int frame_ms)
    : format_(format), frame_samples_(samples_per_frame(format, frame_ms)) {
  validate(format_);
  pending_.reserve(frame_samples_);
}

AudioFrame Framer::make_frame(std::size_t valid, bool terminal) {
  AudioFrame frame;
  frame.format = format_;
  frame.start_time_s = static_cast<double>(consumed_) / format_.sample_rate_hz;
  frame.samples = std::move(pending_);
  frame.samples.resize(frame_samples_, 0);
  frame.valid_samples = valid;
  frame.terminal = terminal;
  consumed_ += frame_samples_;
  pending_.clear();
  pending_.reserve(frame_samples_);
  return frame;
}

std::vector<AudioFrame> Framer::push(std::span<const std::int16_t> samples) {
  std::vector<AudioFrame> out;
  while (!samples.empty()) {
    const std::size_t take = std::min(samples.size(), frame_samples_ - pending_.size());
    pending_.insert(pending_.end(), samples.begin(), samples.begin() + take);
    samples = samples.subspan(take);
    if (pending_.size() == frame_samples_) out.push_back(make_frame(frame_samples_, false));
  }
  return out;
}

std::vector<AudioFrame> Framer::flush() {
  std::vector<AudioFrame> out;
  if (!pending_.empty()) out.push_back(make_frame(pending_.size(), true));
  return out;
}

double rms(std::span<const std::int16_t> samples) noexcept {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto s : samples) {
    const double v = s / 32768.0;
    acc += v * v;
  }
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

double dbfs_to_linear(double dbfs) noexcept { return std::pow(10.0, dbfs / 20.0); }

std::vector<std::int16_t> pcm_from_le_bytes(std::span<const std::byte> bytes) {
  if (bytes.size() % 2 != 0) throw Error(Errc::UnsupportedFormat, "odd PCM byte count");
  std::vector<std::int16_t> out(bytes.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto lo = static_cast<std::uint16_t>(bytes[2 * i]);
    const auto hi = static_cast<std::uint16_t>(bytes[2 * i + 1]);
    out[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }
  return out;
}

std::vector<std::byte> pcm_to_le_bytes(std::span<const std::int16_t> samples) {
  std::vector<std::byte> out(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto u = static_cast<std::uint16_t>(samples[i]);
    out[2 * i] = static_cast<std::byte>(u & 0xFF);
    out[2 * i + 1] = static_cast<std::byte>(u >> 8);
  }
  return out;
}

std::vector<std::int16_t> sine(double frequency_hz, double duration_s, int sample_rate_hz,
                               double amplitude) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  std::vector<std::int16_t> out(n);
  const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate_hz;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::int16_t>(std::lround(amplitude * 32767.0 * std::sin(w * i)));
  }
  return out;
}

}  // namespace sds::audio
