// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sds::audio {

/// Mono signed 16-bit linear PCM at one of the supported rates.
struct AudioFormat {
  int sample_rate_hz = 16000;
  int channels = 1;

  friend bool operator==(const AudioFormat&, const AudioFormat&) = default;
};

/// Throws Errc::UnsupportedFormat unless the rate is 8/16/32/48 kHz and the
/// format is mono.
void validate(const AudioFormat& format);

bool is_supported_frame_ms(int frame_ms) noexcept;

/// Samples in one frame of `frame_ms` at the format's rate.
std::size_t samples_per_frame(const AudioFormat& format, int frame_ms);

struct AudioFrame {
  std::vector<std::int16_t> samples;
  double start_time_s = 0.0;
  AudioFormat format;
  // Number of leading samples that came from the stream; the rest is
  // zero padding on a terminal partial frame.
  std::size_t valid_samples = 0;
  bool terminal = false;

  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / format.sample_rate_hz;
  }
};

/// PCM with its format, the unit carried in worker messages and turn records.
struct AudioBuffer {
  std::vector<std::int16_t> samples;
  AudioFormat format;

  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / format.sample_rate_hz;
  }
  bool empty() const noexcept { return samples.empty(); }
};

struct SpeechSegment {
  std::vector<std::int16_t> samples;
  double start_s = 0.0;
  double end_s = 0.0;
  AudioFormat format;

  double duration_s() const noexcept { return end_s - start_s; }
  AudioBuffer audio() const { return {samples, format}; }
};

/// Splits a stream into fixed-duration frames. The last partial frame is
/// zero-padded and flagged terminal.
std::vector<AudioFrame> frame_audio(std::span<const std::int16_t> stream, const AudioFormat& format,
                                    int frame_ms);

/// Incremental framer for streams that arrive in arbitrary chunks.
class Framer {
 public:
  Framer(AudioFormat format, int frame_ms);

  std::vector<AudioFrame> push(std::span<const std::int16_t> samples);
  /// Emits the zero-padded remainder, if any, as a terminal frame.
  std::vector<AudioFrame> flush();

  std::size_t frame_samples() const noexcept { return frame_samples_; }
  std::uint64_t samples_consumed() const noexcept { return consumed_; }

 private:
  AudioFrame make_frame(std::size_t valid, bool terminal);

  AudioFormat format_;
  std::size_t frame_samples_;
  std::vector<std::int16_t> pending_;
  std::uint64_t consumed_ = 0;
};

/// Root-mean-square level on the linear scale where int16 full scale is 1.0.
double rms(std::span<const std::int16_t> samples) noexcept;

double dbfs_to_linear(double dbfs) noexcept;

std::vector<std::int16_t> pcm_from_le_bytes(std::span<const std::byte> bytes);
std::vector<std::byte> pcm_to_le_bytes(std::span<const std::int16_t> samples);

/// Sine tone at `amplitude` (fraction of full scale).
std::vector<std::int16_t> sine(double frequency_hz, double duration_s, int sample_rate_hz,
                               double amplitude = 0.5);

}  // namespace sds::audio
