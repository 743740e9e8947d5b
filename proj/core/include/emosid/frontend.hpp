#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "emosid/audio.hpp"
#include "emosid/features.hpp"

namespace emosid {

inline constexpr std::size_t kNumStaticCepstra = 8;
inline constexpr std::size_t kFeatureDim = 2 * kNumStaticCepstra;  // statics + deltas
inline constexpr std::size_t kFftSize = 512;

/// 8 static MFCCs C(1)..C(8) followed by their 8 regression deltas.
struct CepstralVector {
  std::array<double, kNumStaticCepstra> statics{};
  std::array<double, kNumStaticCepstra> deltas{};
};

struct FrontendConfig {
  double preemphasis = 0.97;
  std::size_t mel_channels = 24;
  double energy_floor = 1e-10;
  std::size_t delta_window = 2;
};

/// Outputs of the mel filter bank, floored so the logarithm is defined.
struct FilterbankEnergies {
  std::vector<double> values;  // one per channel, all >= energy floor
};

/// Triangular mel-spaced filter bank over 0..Nyquist, applied to the power
/// spectrum of a windowed, zero-padded frame.
class MelFilterbank {
 public:
  MelFilterbank(std::size_t channels, int sample_rate_hz, std::size_t fft_size,
                double energy_floor);

  FilterbankEnergies apply(const Frame &frame) const;

  std::size_t channels() const { return channels_; }
  /// Center frequency of a channel in Hz (1-based channel index).
  double center_frequency_hz(std::size_t channel) const;

 private:
  std::size_t channels_;
  std::size_t fft_size_;
  double energy_floor_;
  std::vector<double> centers_hz_;            // channels_ + 2 edge points
  std::vector<std::vector<double>> weights_;  // per channel, per spectrum bin
};

AudioBuffer pre_emphasize(const AudioBuffer &audio, double coeff);
std::vector<Frame> frame_signal(const AudioBuffer &audio);
FilterbankEnergies mel_energies(const Frame &frame, std::size_t channels);
std::array<double, kNumStaticCepstra> mfcc(const FilterbankEnergies &energies);
std::vector<std::array<double, kNumStaticCepstra>> deltas(
    const std::vector<std::array<double, kNumStaticCepstra>> &statics_seq,
    std::size_t window);

/// Full pipeline: pre-emphasis, framing, mel energies, cepstra, deltas.
FeatureSequence extract_features(const AudioBuffer &audio,
                                 const FrontendConfig &config = {});

namespace detail {
/// Power spectrum |X(k)|^2 of a Hamming-windowed frame zero-padded to
/// kFftSize points; returns kFftSize/2 + 1 bins.
std::vector<double> power_spectrum(const Frame &frame);
double hz_to_mel(double hz);
double mel_to_hz(double mel);
}  // namespace detail

}  // namespace emosid
