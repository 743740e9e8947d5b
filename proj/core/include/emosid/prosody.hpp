#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "emosid/audio.hpp"
#include "emosid/features.hpp"

namespace emosid {

inline constexpr std::size_t kProsodyDim = 7;
inline constexpr std::size_t kSuprasegmentalSegments = 3;

/// Pooled prosodic description of one suprasegmental segment.
struct ProsodicVector {
  double pitch_mean_hz = 0.0;
  double pitch_slope_hz_per_s = 0.0;
  double pitch_range_hz = 0.0;
  double energy_mean_db = 0.0;
  double energy_range_db = 0.0;
  double voiced_fraction = 0.0;
  double log_duration = 0.0;  // log seconds

  std::array<double, kProsodyDim> as_array() const {
    return {pitch_mean_hz,  pitch_slope_hz_per_s, pitch_range_hz, energy_mean_db,
            energy_range_db, voiced_fraction,      log_duration};
  }
};

/// The suprasegmental observation stream: one prosodic vector per segment.
struct SuprasegmentalSequence {
  std::vector<ProsodicVector> segments;

  FeatureMatrix to_matrix() const {
    FeatureMatrix m(kProsodyDim);
    m.reserve_rows(segments.size());
    for (const auto &s : segments) m.push_row(s.as_array());
    return m;
  }
};

struct PitchConfig {
  double min_pitch_hz = 60.0;
  double max_pitch_hz = 400.0;
  double voicing_threshold = 0.3;   // on the normalized autocorrelation peak
  double peak_energy_ratio = 0.15;  // peak autocorrelation over low-band energy
  double low_band_fraction = 0.1;   // voiced frames concentrate energy below the cutoff
  double silence_floor = 1e-5;      // mean-square amplitude
  double lowpass_hz = 350.0;        // keeps the fundamental, drops formant ringing
};

/// Autocorrelation pitch of one frame, or nullopt when unvoiced. The usable
/// lag range is clipped so the correlation keeps a minimum overlap; at 256
/// samples that bounds detectable pitch to roughly 71 Hz and up.
std::optional<double> estimate_pitch(const Frame &frame, const PitchConfig &config = {});

/// 10*log10(mean squared amplitude + floor).
double frame_energy_db(const Frame &frame);

/// Uniform partition of [0, n_frames) into contiguous ranges; remainder
/// frames go one each to the earliest segments. Returns [begin, end) pairs.
std::vector<std::pair<std::size_t, std::size_t>> segment_utterance(
    std::size_t n_frames, std::size_t n_segments);

SuprasegmentalSequence suprasegmental_observations(
    const AudioBuffer &audio, std::size_t n_segments = kSuprasegmentalSegments,
    const PitchConfig &config = {});

}  // namespace emosid
