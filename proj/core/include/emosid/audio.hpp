#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "emosid/errors.hpp"

namespace emosid {

inline constexpr int kSampleRateHz = 16000;

// 16 ms frames with 9 ms overlap at 16 kHz.
inline constexpr std::size_t kFrameLength = 256;
inline constexpr std::size_t kFrameHop = 112;

using Frame = std::array<double, kFrameLength>;

/// Mono PCM utterance, normalized amplitudes. v1 is fixed at 16 kHz.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = kSampleRateHz;
};

/// Checks the external-input invariants: 16 kHz, finite samples in [-1, 1].
/// Internal intermediates (e.g. pre-emphasized audio) are not revalidated
/// because the first-difference filter can leave [-1, 1].
inline void validate_audio(const AudioBuffer &audio) {
  if (audio.sample_rate_hz != kSampleRateHz)
    throw UnsupportedFormat("sample rate must be 16000 Hz, got " +
                            std::to_string(audio.sample_rate_hz));
  for (double s : audio.samples) {
    if (!std::isfinite(s) || s < -1.0 || s > 1.0)
      throw InvariantViolation("audio sample outside [-1, 1]");
  }
}

/// Frame count for a given sample count, or 0 when below one frame.
inline std::size_t frame_count_for(std::size_t n_samples) {
  if (n_samples < kFrameLength) return 0;
  return (n_samples - kFrameLength) / kFrameHop + 1;
}

}  // namespace emosid
