#include "emosid/frontend.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <utility>

#include "emosid/errors.hpp"

namespace emosid {

namespace {

// Iterative radix-2 FFT, in place. n must be a power of two.
void fft_inplace(std::vector<std::complex<double>> &x) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wn(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wn;
      }
    }
  }
}

const std::array<double, kFrameLength> &hamming_window() {
  static const std::array<double, kFrameLength> window = [] {
    std::array<double, kFrameLength> w{};
    for (std::size_t i = 0; i < kFrameLength; ++i)
      w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(kFrameLength - 1));
    return w;
  }();
  return window;
}

}  // namespace

namespace detail {

std::vector<double> power_spectrum(const Frame &frame) {
  const auto &window = hamming_window();
  std::vector<std::complex<double>> buf(kFftSize, {0.0, 0.0});
  for (std::size_t i = 0; i < kFrameLength; ++i) buf[i] = frame[i] * window[i];
  fft_inplace(buf);
  std::vector<double> power(kFftSize / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace detail

MelFilterbank::MelFilterbank(std::size_t channels, int sample_rate_hz,
                             std::size_t fft_size, double energy_floor)
    : channels_(channels), fft_size_(fft_size), energy_floor_(energy_floor) {
  const double nyquist = sample_rate_hz / 2.0;
  const double mel_max = detail::hz_to_mel(nyquist);
  centers_hz_.resize(channels_ + 2);
  for (std::size_t i = 0; i < centers_hz_.size(); ++i)
    centers_hz_[i] = detail::mel_to_hz(mel_max * static_cast<double>(i) /
                                       static_cast<double>(channels_ + 1));

  const std::size_t n_bins = fft_size_ / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(fft_size_);
  weights_.assign(channels_, std::vector<double>(n_bins, 0.0));
  for (std::size_t m = 0; m < channels_; ++m) {
    const double lo = centers_hz_[m];
    const double mid = centers_hz_[m + 1];
    const double hi = centers_hz_[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      if (f <= lo || f >= hi) continue;
      weights_[m][k] = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
    }
  }
}

double MelFilterbank::center_frequency_hz(std::size_t channel) const {
  return centers_hz_.at(channel);
}

FilterbankEnergies MelFilterbank::apply(const Frame &frame) const {
  const std::vector<double> power = detail::power_spectrum(frame);
  FilterbankEnergies out;
  out.values.resize(channels_);
  for (std::size_t m = 0; m < channels_; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) acc += weights_[m][k] * power[k];
    out.values[m] = std::max(acc, energy_floor_);
  }
  return out;
}

AudioBuffer pre_emphasize(const AudioBuffer &audio, double coeff) {
  if (audio.samples.empty()) throw EmptyAudio("pre_emphasize on empty audio");
  if (coeff < 0.0 || coeff >= 1.0)
    throw InvariantViolation("pre-emphasis coefficient must be in [0, 1)");
  AudioBuffer out;
  out.sample_rate_hz = audio.sample_rate_hz;
  out.samples.resize(audio.samples.size());
  out.samples[0] = audio.samples[0];
  for (std::size_t i = 1; i < audio.samples.size(); ++i)
    out.samples[i] = audio.samples[i] - coeff * audio.samples[i - 1];
  return out;
}

std::vector<Frame> frame_signal(const AudioBuffer &audio) {
  const std::size_t count = frame_count_for(audio.samples.size());
  if (count == 0)
    throw AudioTooShort("need at least " + std::to_string(kFrameLength) +
                        " samples, got " + std::to_string(audio.samples.size()));
  std::vector<Frame> frames(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = k * kFrameHop;
    for (std::size_t i = 0; i < kFrameLength; ++i)
      frames[k][i] = audio.samples[start + i];
  }
  return frames;
}

FilterbankEnergies mel_energies(const Frame &frame, std::size_t channels) {
  static std::mutex cache_mutex;
  static std::vector<std::pair<std::size_t, MelFilterbank>> cache;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    for (const auto &[m, bank] : cache)
      if (m == channels) return bank.apply(frame);
    cache.emplace_back(channels, MelFilterbank(channels, kSampleRateHz, kFftSize,
                                               FrontendConfig{}.energy_floor));
    return cache.back().second.apply(frame);
  }
}

std::array<double, kNumStaticCepstra> mfcc(const FilterbankEnergies &energies) {
  const std::size_t m_channels = energies.values.size();
  std::array<double, kNumStaticCepstra> out{};
  std::vector<double> log_energy(m_channels);
  for (std::size_t m = 0; m < m_channels; ++m) {
    if (!(energies.values[m] > 0.0))
      throw NonPositiveEnergy("filter bank output " + std::to_string(m + 1) +
                              " is not strictly positive");
    log_energy[m] = std::log(energies.values[m]);
  }
  for (std::size_t n = 1; n <= kNumStaticCepstra; ++n) {
    double acc = 0.0;
    for (std::size_t m = 1; m <= m_channels; ++m)
      acc += log_energy[m - 1] *
             std::cos(std::numbers::pi * static_cast<double>(n) /
                      static_cast<double>(m_channels) * (static_cast<double>(m) - 0.5));
    out[n - 1] = acc;
  }
  return out;
}

std::vector<std::array<double, kNumStaticCepstra>> deltas(
    const std::vector<std::array<double, kNumStaticCepstra>> &statics_seq,
    std::size_t window) {
  const std::size_t n = statics_seq.size();
  std::vector<std::array<double, kNumStaticCepstra>> out(n);
  if (n == 0) return out;
  double denom = 0.0;
  for (std::size_t w = 1; w <= window; ++w) denom += static_cast<double>(w * w);
  denom *= 2.0;
  auto clamped = [&](std::ptrdiff_t t) -> const std::array<double, kNumStaticCepstra> & {
    if (t < 0) return statics_seq.front();
    if (t >= static_cast<std::ptrdiff_t>(n)) return statics_seq.back();
    return statics_seq[static_cast<std::size_t>(t)];
  };
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t d = 0; d < kNumStaticCepstra; ++d) {
      double acc = 0.0;
      for (std::size_t w = 1; w <= window; ++w) {
        const auto ti = static_cast<std::ptrdiff_t>(t);
        const auto wi = static_cast<std::ptrdiff_t>(w);
        acc += static_cast<double>(w) * (clamped(ti + wi)[d] - clamped(ti - wi)[d]);
      }
      out[t][d] = acc / denom;
    }
  }
  return out;
}

FeatureSequence extract_features(const AudioBuffer &audio, const FrontendConfig &config) {
  const AudioBuffer emphasized = pre_emphasize(audio, config.preemphasis);
  const std::vector<Frame> frames = frame_signal(emphasized);
  const MelFilterbank bank(config.mel_channels, audio.sample_rate_hz, kFftSize,
                           config.energy_floor);

  std::vector<std::array<double, kNumStaticCepstra>> statics;
  statics.reserve(frames.size());
  for (const Frame &frame : frames) statics.push_back(mfcc(bank.apply(frame)));
  const auto delta_seq = deltas(statics, config.delta_window);

  FeatureSequence features(kFeatureDim);
  features.reserve_rows(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::array<double, kFeatureDim> row{};
    for (std::size_t d = 0; d < kNumStaticCepstra; ++d) {
      row[d] = statics[t][d];
      row[kNumStaticCepstra + d] = delta_seq[t][d];
    }
    features.push_row(row);
  }
  return features;
}

}  // namespace emosid
