// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "sds/error.hpp"

namespace sds::wav {
namespace {

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xFF));
  out.push_back(static_cast<std::byte>(v >> 8));
}

void put_tag(std::vector<std::byte>& out, const char* tag) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>(tag[i]));
}

std::uint32_t get_u32(std::span<const std::byte> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint32_t>(b[at + i]);
  return v;
}

std::uint16_t get_u16(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<std::uint16_t>(b[at]) |
                                    (static_cast<std::uint16_t>(b[at + 1]) << 8));
}

bool tag_is(std::span<const std::byte> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

}  // namespace

std::vector<std::byte> encode(const audio::AudioBuffer& audio) {
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  const auto rate = static_cast<std::uint32_t>(audio.format.sample_rate_hz);
  std::vector<std::byte> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, rate);
  put_u32(out, rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  const auto pcm = audio::pcm_to_le_bytes(audio.samples);
  out.insert(out.end(), pcm.begin(), pcm.end());
  return out;
}

audio::AudioBuffer decode(std::span<const std::byte> b) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) {
    throw Error(Errc::UnsupportedFormat, "not a RIFF/WAVE file");
  }
  audio::AudioBuffer out;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const auto size = get_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (body + size > b.size()) throw Error(Errc::UnsupportedFormat, "truncated WAV chunk");
    if (tag_is(b, at, "fmt ")) {
      if (size < 16) throw Error(Errc::UnsupportedFormat, "short fmt chunk");
      if (get_u16(b, body) != 1 || get_u16(b, body + 14) != 16) {
        throw Error(Errc::UnsupportedFormat, "only 16-bit PCM WAV is supported");
      }
      out.format.channels = get_u16(b, body + 2);
      out.format.sample_rate_hz = static_cast<int>(get_u32(b, body + 4));
      audio::validate(out.format);
      have_fmt = true;
    } else if (tag_is(b, at, "data")) {
      if (!have_fmt) throw Error(Errc::UnsupportedFormat, "data chunk before fmt");
      out.samples = audio::pcm_from_le_bytes(b.subspan(body, size & ~std::uint32_t{1}));
      return out;
    }
    at = body + size + (size & 1);
  }
  throw Error(Errc::UnsupportedFormat, "missing data chunk");
}

audio::AudioBuffer read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(std::as_bytes(std::span(raw)));
}

}  // namespace sds::wav
