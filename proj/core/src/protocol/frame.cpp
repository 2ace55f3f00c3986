// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/protocol/frame.hpp"

#include <string>

#include "sds/error.hpp"

namespace sds::protocol {
namespace {

std::uint32_t read_le32(std::span<const std::byte> b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

// Validates the prefix and kind byte; returns total_len.
std::uint32_t check_header(std::span<const std::byte> bytes, std::size_t max_payload) {
  if (bytes.size() < kLengthPrefixBytes) {
    throw Error(Errc::Truncated, "need 4 length bytes, have " + std::to_string(bytes.size()));
  }
  const auto total_len = read_le32(bytes);
  if (total_len == 0) throw Error(Errc::MalformedFrame, "total_len 0 has no kind byte");
  if (total_len - 1 > max_payload) {
    throw Error(Errc::MalformedFrame, "payload of " + std::to_string(total_len - 1) + " bytes");
  }
  if (bytes.size() > kLengthPrefixBytes) {
    const auto kind = static_cast<std::uint8_t>(bytes[kLengthPrefixBytes]);
    if (kind > 1) throw Error(Errc::BadKind, "kind " + std::to_string(kind));
  }
  return total_len;
}

}  // namespace

std::vector<std::byte> encode_frame(FrameKind kind, std::span<const std::byte> payload) {
  if (payload.size() > kMaxPayloadBytes) {
    throw Error(Errc::InvalidArgument, "payload must be shorter than 2^31 bytes");
  }
  const auto total_len = static_cast<std::uint32_t>(payload.size() + 1);
  std::vector<std::byte> out;
  out.reserve(payload.size() + kLengthPrefixBytes + 1);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((total_len >> (8 * i)) & 0xFF));
  out.push_back(static_cast<std::byte>(kind));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

DecodedFrame decode_frame(std::span<const std::byte> bytes) {
  const auto total_len = check_header(bytes, kMaxPayloadBytes);
  const std::size_t need = std::size_t{total_len} + kLengthPrefixBytes;
  if (bytes.size() < need) {
    throw Error(Errc::Truncated,
                "need " + std::to_string(need) + " bytes, have " + std::to_string(bytes.size()));
  }
  DecodedFrame out;
  out.frame.kind = static_cast<FrameKind>(bytes[kLengthPrefixBytes]);
  const auto body = bytes.subspan(kLengthPrefixBytes + 1, total_len - 1);
  out.frame.payload.assign(body.begin(), body.end());
  out.consumed = need;
  return out;
}

void FrameReader::feed(std::span<const std::byte> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Frame> FrameReader::next() {
  const std::span<const std::byte> view(buffer_.data() + offset_, buffer_.size() - offset_);
  if (view.size() < kLengthPrefixBytes) return std::nullopt;
  const auto total_len = check_header(view, max_payload_);
  if (view.size() < std::size_t{total_len} + kLengthPrefixBytes) return std::nullopt;
  auto decoded = decode_frame(view);
  offset_ += decoded.consumed;
  // Compact once the consumed prefix dominates the buffer.
  if (offset_ > (1u << 16) && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return std::move(decoded.frame);
}

}  // namespace sds::protocol
