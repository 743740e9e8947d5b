#include "emosid/prosody.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "emosid/errors.hpp"
#include "emosid/frontend.hpp"

namespace emosid {

namespace {

constexpr double kEnergyFloor = 1e-10;
constexpr std::size_t kMinLagOverlap = 32;

double mean_square(const Frame &frame) {
  double acc = 0.0;
  for (double s : frame) acc += s * s;
  return acc / static_cast<double>(frame.size());
}

struct SegmentStats {
  std::vector<double> voiced_time_s;
  std::vector<double> voiced_pitch_hz;
  std::vector<double> energy_db;
};

double least_squares_slope(const std::vector<double> &t, const std::vector<double> &y) {
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (t[i] - tm) * (y[i] - ym);
    den += (t[i] - tm) * (t[i] - tm);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

std::optional<double> estimate_pitch(const Frame &frame, const PitchConfig &config) {
  const std::size_t n = frame.size();
  if (mean_square(frame) < config.silence_floor) return std::nullopt;

  // DC offset would correlate at every lag.
  double mean = 0.0;
  for (double s : frame) mean += s;
  mean /= static_cast<double>(n);
  std::array<double, kFrameLength> x{};
  for (std::size_t i = 0; i < n; ++i) x[i] = frame[i] - mean;

  double full_band_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) full_band_energy += x[i] * x[i];

  // Low-pass (two cascaded one-pole sections) before the lag search; formant
  // ringing above the fundamental only blurs and aliases the periodicity peak.
  const double smoothing =
      1.0 - std::exp(-2.0 * std::numbers::pi * config.lowpass_hz / kSampleRateHz);
  double lp_stage1 = 0.0, lp_stage2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lp_stage1 += smoothing * (x[i] - lp_stage1);
    lp_stage2 += smoothing * (lp_stage1 - lp_stage2);
    x[i] = lp_stage2;
  }

  // Voiced speech keeps a solid share of its energy near the fundamental;
  // broadband noise does not survive the low-pass.
  if (full_band_energy <= 0.0) return std::nullopt;

  const auto lag_min = static_cast<std::size_t>(kSampleRateHz / config.max_pitch_hz);
  const auto lag_max = std::min(
      static_cast<std::size_t>(std::ceil(kSampleRateHz / config.min_pitch_hz)),
      n - kMinLagOverlap);
  if (lag_min + 1 >= lag_max) return std::nullopt;

  // Suffix energies for the correlation normalization.
  std::vector<double> suffix_sq(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix_sq[i] = suffix_sq[i + 1] + x[i] * x[i];
  const double low_band_energy = suffix_sq[0];
  if (low_band_energy < config.low_band_fraction * full_band_energy) return std::nullopt;

  std::vector<double> raw(lag_max + 1, 0.0);
  std::vector<double> ncc(lag_max + 1, 0.0);
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
    double dot = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) dot += x[t] * x[t + lag];
    raw[lag] = dot;
    const double head = low_band_energy - suffix_sq[n - lag];  // energy of x[0..n-lag)
    const double tail = suffix_sq[lag];                    // energy of x[lag..n)
    ncc[lag] = dot / std::sqrt(head * tail + 1e-30);
  }

  const double peak = *std::max_element(ncc.begin() + static_cast<std::ptrdiff_t>(lag_min),
                                        ncc.end());
  if (peak < config.voicing_threshold) return std::nullopt;

  // Prefer the shortest lag whose peak is close to the global one; a truly
  // periodic frame also peaks at period multiples.
  std::size_t best = 0;
  for (std::size_t lag = lag_min + 1; lag < lag_max; ++lag) {
    if (ncc[lag] >= ncc[lag - 1] && ncc[lag] >= ncc[lag + 1] &&
        ncc[lag] >= std::max(config.voicing_threshold, 0.85 * peak)) {
      best = lag;
      break;
    }
  }
  if (best == 0) return std::nullopt;

  // Short-overlap noise can fake a high normalized peak; demand the peak also
  // carry a minimum share of the frame's low-band energy.
  if (raw[best] / low_band_energy < config.peak_energy_ratio) return std::nullopt;

  // Parabolic refinement around the integer lag.
  double lag_refined = static_cast<double>(best);
  const double y0 = ncc[best - 1], y1 = ncc[best], y2 = ncc[best + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (std::abs(denom) > 1e-12) {
    const double delta = 0.5 * (y0 - y2) / denom;
    if (std::abs(delta) <= 1.0) lag_refined += delta;
  }

  const double pitch = static_cast<double>(kSampleRateHz) / lag_refined;
  return std::clamp(pitch, static_cast<double>(kSampleRateHz) / static_cast<double>(lag_max),
                    config.max_pitch_hz);
}

double frame_energy_db(const Frame &frame) {
  return 10.0 * std::log10(mean_square(frame) + kEnergyFloor);
}

std::vector<std::pair<std::size_t, std::size_t>> segment_utterance(std::size_t n_frames,
                                                                   std::size_t n_segments) {
  if (n_segments == 0) throw InvariantViolation("segment count must be positive");
  if (n_frames < n_segments)
    throw TooFewFrames(std::to_string(n_frames) + " frames cannot fill " +
                       std::to_string(n_segments) + " segments");
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  ranges.reserve(n_segments);
  const std::size_t base = n_frames / n_segments;
  const std::size_t remainder = n_frames % n_segments;
  std::size_t begin = 0;
  for (std::size_t s = 0; s < n_segments; ++s) {
    const std::size_t size = base + (s < remainder ? 1 : 0);
    ranges.emplace_back(begin, begin + size);
    begin += size;
  }
  return ranges;
}

SuprasegmentalSequence suprasegmental_observations(const AudioBuffer &audio,
                                                   std::size_t n_segments,
                                                   const PitchConfig &config) {
  const std::vector<Frame> frames = frame_signal(audio);
  const auto ranges = segment_utterance(frames.size(), n_segments);

  std::vector<std::optional<double>> pitch(frames.size());
  std::vector<double> energy(frames.size());
  double peak_energy = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    pitch[t] = estimate_pitch(frames[t], config);
    energy[t] = frame_energy_db(frames[t]);
    peak_energy = std::max(peak_energy, energy[t]);
  }
  // Frames far below the utterance peak carry only decay tails and breath
  // noise; their pitch votes are unreliable.
  for (std::size_t t = 0; t < frames.size(); ++t)
    if (energy[t] < peak_energy - 20.0) pitch[t] = std::nullopt;

  SuprasegmentalSequence out;
  out.segments.reserve(n_segments);
  const double hop_s = static_cast<double>(kFrameHop) / kSampleRateHz;
  for (const auto &[begin, end] : ranges) {
    SegmentStats stats;
    for (std::size_t t = begin; t < end; ++t) {
      stats.energy_db.push_back(energy[t]);
      if (pitch[t]) {
        const double center_s =
            (static_cast<double>(t * kFrameHop) + kFrameLength / 2.0) / kSampleRateHz;
        stats.voiced_time_s.push_back(center_s);
        stats.voiced_pitch_hz.push_back(*pitch[t]);
      }
    }

    ProsodicVector v;
    const std::size_t seg_frames = end - begin;
    v.voiced_fraction =
        static_cast<double>(stats.voiced_pitch_hz.size()) / static_cast<double>(seg_frames);
    if (!stats.voiced_pitch_hz.empty()) {
      const auto [lo, hi] =
          std::minmax_element(stats.voiced_pitch_hz.begin(), stats.voiced_pitch_hz.end());
      v.pitch_mean_hz = std::accumulate(stats.voiced_pitch_hz.begin(),
                                        stats.voiced_pitch_hz.end(), 0.0) /
                        static_cast<double>(stats.voiced_pitch_hz.size());
      v.pitch_range_hz = *hi - *lo;
      v.pitch_slope_hz_per_s = least_squares_slope(stats.voiced_time_s, stats.voiced_pitch_hz);
    }
    const auto [elo, ehi] = std::minmax_element(stats.energy_db.begin(), stats.energy_db.end());
    v.energy_mean_db = std::accumulate(stats.energy_db.begin(), stats.energy_db.end(), 0.0) /
                       static_cast<double>(seg_frames);
    v.energy_range_db = *ehi - *elo;
    v.log_duration = std::log(static_cast<double>(seg_frames) * hop_s);
    out.segments.push_back(v);
  }
  return out;
}

}  // namespace emosid
