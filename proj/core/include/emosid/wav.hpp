#pragma once

#include <filesystem>

#include "emosid/audio.hpp"

namespace emosid {

/// Decodes a RIFF/WAVE file. Only PCM, 16-bit signed little-endian, mono,
/// 16 kHz is accepted; anything else raises UnsupportedFormat.
AudioBuffer read_wav(const std::filesystem::path &path);

/// Writes 16-bit PCM mono at the buffer's sample rate; samples are clipped
/// to [-1, 1] before quantization.
void write_wav(const AudioBuffer &audio, const std::filesystem::path &path);

}  // namespace emosid
