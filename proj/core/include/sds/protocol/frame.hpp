// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sds::protocol {

// Wire unit: [u32 little-endian total_len][u8 kind][payload], with
// total_len = 1 + payload length.
enum class FrameKind : std::uint8_t {
  Header = 0,  // UTF-8 JSON object
  Audio = 1,   // raw little-endian s16 PCM
};

struct Frame {
  FrameKind kind = FrameKind::Header;
  std::vector<std::byte> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

inline constexpr std::size_t kLengthPrefixBytes = 4;
inline constexpr std::uint32_t kMaxPayloadBytes = 0x7FFFFFFF - 1;

std::vector<std::byte> encode_frame(FrameKind kind, std::span<const std::byte> payload);

struct DecodedFrame {
  Frame frame;
  std::size_t consumed = 0;
};

/// Decodes one frame from the front of `bytes`. Throws Errc::Truncated when
/// fewer than total_len + 4 bytes are available, Errc::BadKind for an unknown
/// kind byte and Errc::MalformedFrame for a zero or oversized length.
DecodedFrame decode_frame(std::span<const std::byte> bytes);

/// Accumulates stream bytes and yields complete frames.
class FrameReader {
 public:
  explicit FrameReader(std::size_t max_payload = 64u << 20) : max_payload_(max_payload) {}

  void feed(std::span<const std::byte> bytes);
  /// Next complete frame, or nullopt if more bytes are needed.
  std::optional<Frame> next();
  std::size_t buffered() const noexcept { return buffer_.size() - offset_; }

 private:
  std::vector<std::byte> buffer_;
  std::size_t offset_ = 0;
  std::size_t max_payload_;
};

}  // namespace sds::protocol
