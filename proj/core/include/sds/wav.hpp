// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "sds/audio.hpp"

namespace sds::wav {

/// RIFF/WAVE, PCM 16-bit mono.
std::vector<std::byte> encode(const audio::AudioBuffer& audio);
audio::AudioBuffer decode(std::span<const std::byte> bytes);

audio::AudioBuffer read_file(const std::filesystem::path& path);

}  // namespace sds::wav
