#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "emosid/errors.hpp"
#include "emosid/frontend.hpp"

using namespace emosid;

namespace {

AudioBuffer make_audio(std::vector<double> samples) {
  AudioBuffer audio;
  audio.samples = std::move(samples);
  return audio;
}

AudioBuffer sine_audio(double freq_hz, double amplitude, std::size_t n_samples) {
  AudioBuffer audio;
  audio.samples.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    audio.samples[i] =
        amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * i / kSampleRateHz);
  return audio;
}

Frame sine_frame(double freq_hz, double amplitude) {
  Frame frame{};
  for (std::size_t i = 0; i < kFrameLength; ++i)
    frame[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * i / kSampleRateHz);
  return frame;
}

}  // namespace

TEST_CASE("pre_emphasize identity at zero coefficient") {
  const AudioBuffer audio = sine_audio(100.0, 0.5, 1000);
  const AudioBuffer out = pre_emphasize(audio, 0.0);
  CHECK(out.samples == audio.samples);
}

TEST_CASE("pre_emphasize difference formula") {
  const AudioBuffer out = pre_emphasize(make_audio({1.0, 1.0, 1.0}), 0.97);
  REQUIRE(out.samples.size() == 3);
  CHECK(out.samples[0] == doctest::Approx(1.0));
  CHECK(out.samples[1] == doctest::Approx(0.03));
  CHECK(out.samples[2] == doctest::Approx(0.03));

  const AudioBuffer impulse = pre_emphasize(make_audio({1.0, 0.0, 0.0}), 0.97);
  CHECK(impulse.samples[0] == doctest::Approx(1.0));
  CHECK(impulse.samples[1] == doctest::Approx(-0.97));
  CHECK(impulse.samples[2] == doctest::Approx(0.0));
}

TEST_CASE("pre_emphasize rejects empty audio") {
  CHECK_THROWS_AS(pre_emphasize(make_audio({}), 0.97), EmptyAudio);
}

TEST_CASE("frame_signal counts and boundaries") {
  CHECK(frame_signal(sine_audio(100.0, 0.5, 16000)).size() == 141);
  CHECK(frame_signal(sine_audio(100.0, 0.5, 256)).size() == 1);
  CHECK_THROWS_AS(frame_signal(sine_audio(100.0, 0.5, 255)), AudioTooShort);
}

TEST_CASE("frame count formula matches start-index enumeration") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> length(256, 40000);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = length(rng);
    std::size_t enumerated = 0;
    for (std::size_t start = 0; start + kFrameLength <= len; start += kFrameHop) ++enumerated;
    CHECK(frame_count_for(len) == enumerated);
  }
}

TEST_CASE("frame k starts at sample 112k") {
  AudioBuffer audio;
  audio.samples.resize(600);
  for (std::size_t i = 0; i < audio.samples.size(); ++i)
    audio.samples[i] = static_cast<double>(i) / 1000.0;
  const auto frames = frame_signal(audio);
  REQUIRE(frames.size() == frame_count_for(600));
  for (std::size_t k = 0; k < frames.size(); ++k)
    CHECK(frames[k][0] == audio.samples[k * kFrameHop]);
}

TEST_CASE("mel_energies floors an all-zero frame") {
  const Frame zero{};
  const auto energies = mel_energies(zero, 24);
  REQUIRE(energies.values.size() == 24);
  for (double v : energies.values) CHECK(v == FrontendConfig{}.energy_floor);
}

TEST_CASE("mel_energies peak channel tracks a 1 kHz tone") {
  const MelFilterbank bank(24, kSampleRateHz, kFftSize, 1e-10);
  const auto energies = bank.apply(sine_frame(1000.0, 0.8));
  std::size_t argmax = 0;
  for (std::size_t m = 1; m < energies.values.size(); ++m)
    if (energies.values[m] > energies.values[argmax]) argmax = m;

  // The expected channel is the one whose center lies nearest 1 kHz.
  std::size_t nearest = 1;
  for (std::size_t m = 1; m <= 24; ++m)
    if (std::abs(bank.center_frequency_hz(m) - 1000.0) <
        std::abs(bank.center_frequency_hz(nearest) - 1000.0))
      nearest = m;
  CHECK(argmax + 1 == nearest);
}

TEST_CASE("mel energies are quadratic in amplitude") {
  const auto base = mel_energies(sine_frame(700.0, 0.3), 24);
  const auto doubled = mel_energies(sine_frame(700.0, 0.6), 24);
  for (std::size_t m = 0; m < base.values.size(); ++m) {
    if (base.values[m] <= 1e-9) continue;  // floored channels stay floored
    CHECK(doubled.values[m] == doctest::Approx(4.0 * base.values[m]).epsilon(1e-9));
  }
}

TEST_CASE("mfcc of constant filter bank is zero") {
  FilterbankEnergies energies;
  for (double c : {1.0, 3.7}) {
    energies.values.assign(24, c);
    const auto statics = mfcc(energies);
    for (double value : statics) CHECK(std::abs(value) < 1e-12);
  }
}

TEST_CASE("mfcc single-channel bump matches the direct sum") {
  FilterbankEnergies energies;
  energies.values.assign(24, 1.0);
  energies.values[0] = std::numbers::e;
  const auto statics = mfcc(energies);
  for (std::size_t n = 1; n <= kNumStaticCepstra; ++n) {
    // Only the m=1 term survives: log(e) * cos(pi*n/24 * 1/2).
    const double expected = std::cos(std::numbers::pi * static_cast<double>(n) / 24.0 * 0.5);
    CHECK(statics[n - 1] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("mfcc rejects non-positive energies") {
  FilterbankEnergies energies;
  energies.values.assign(24, 1.0);
  energies.values[5] = 0.0;
  CHECK_THROWS_AS(mfcc(energies), NonPositiveEnergy);
}

TEST_CASE("deltas of a constant sequence vanish") {
  std::vector<std::array<double, kNumStaticCepstra>> seq(10);
  for (auto &v : seq) v.fill(2.5);
  for (const auto &d : deltas(seq, 2))
    for (double value : d) CHECK(value == 0.0);
}

TEST_CASE("deltas of a unit ramp are one at interior frames") {
  std::vector<std::array<double, kNumStaticCepstra>> seq(5);
  for (std::size_t t = 0; t < 5; ++t) seq[t].fill(static_cast<double>(t));
  const auto d = deltas(seq, 2);
  for (double value : d[2]) CHECK(value == doctest::Approx(1.0));
}

TEST_CASE("deltas of a single frame are zero") {
  std::vector<std::array<double, kNumStaticCepstra>> seq(1);
  seq[0].fill(1.25);
  const auto d = deltas(seq, 2);
  REQUIRE(d.size() == 1);
  for (double value : d[0]) CHECK(value == 0.0);
}

TEST_CASE("extract_features shape and determinism") {
  const AudioBuffer audio = sine_audio(150.0, 0.4, 16000);
  const FeatureSequence a = extract_features(audio);
  CHECK(a.rows() == 141);
  CHECK(a.dim() == kFeatureDim);
  const FeatureSequence b = extract_features(audio);
  CHECK(a == b);
}

TEST_CASE("silence produces identical all-zero feature rows") {
  AudioBuffer silence;
  silence.samples.assign(16000, 0.0);
  const FeatureSequence features = extract_features(silence);
  REQUIRE(features.rows() == 141);
  for (std::size_t t = 0; t < features.rows(); ++t)
    for (double v : features.row(t)) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("static cepstra are gain invariant when nothing is floored") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  AudioBuffer loud;
  loud.samples.resize(8000);
  for (double &s : loud.samples) s = 0.5 * noise(rng);
  AudioBuffer quiet = loud;
  for (double &s : quiet.samples) s *= 0.5;

  const FeatureSequence a = extract_features(loud);
  const FeatureSequence b = extract_features(quiet);
  REQUIRE(a.rows() == b.rows());
  for (std::size_t t = 0; t < a.rows(); ++t)
    for (std::size_t d = 0; d < kNumStaticCepstra; ++d)
      CHECK(a.row(t)[d] == doctest::Approx(b.row(t)[d]).epsilon(1e-6));
}

TEST_CASE("features stay finite on arbitrary audio") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    AudioBuffer audio;
    audio.samples.resize(2000);
    for (double &s : audio.samples) s = noise(rng);
    const FeatureSequence features = extract_features(audio);
    for (std::size_t t = 0; t < features.rows(); ++t)
      for (double v : features.row(t)) CHECK(std::isfinite(v));
  }
}
