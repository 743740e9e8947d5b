#include "emosid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "emosid/errors.hpp"
#include "emosid/numeric.hpp"
#include "emosid/parallel.hpp"
#include "emosid/wav.hpp"

namespace emosid {

namespace {

// Two-pole resonator, y[n] = a0 x[n] + b1 y[n-1] - b2 y[n-2].
struct Resonator {
  double a0 = 0.0, b1 = 0.0, b2 = 0.0;
  double y1 = 0.0, y2 = 0.0;

  void design(double freq_hz, double bandwidth_hz, double gain) {
    const double r = std::exp(-std::numbers::pi * bandwidth_hz / kSampleRateHz);
    b2 = r * r;
    b1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq_hz / kSampleRateHz);
    a0 = gain * (1.0 - b1 + b2);
  }

  double step(double x) {
    const double y = a0 * x + b1 * y1 - b2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

double frac(double x) { return x - std::floor(x); }

struct SpeakerVoice {
  double base_pitch_hz;
  double f1, f2, f3;  // resonance centers in Hz
};

SpeakerVoice speaker_voice(const SynthSpec &spec, Gender gender, int speaker_id) {
  const PitchRangeHz &range = gender == Gender::Male ? spec.male_pitch : spec.female_pitch;
  const double center = 0.5 * (range.lo + range.hi);
  const double position =
      (static_cast<double>(speaker_id) - 0.5) / spec.dims.speakers_per_gender - 0.5;

  SpeakerVoice voice;
  voice.base_pitch_hz = center + (range.hi - range.lo) * spec.speaker_pitch_spread * position;

  // Low-discrepancy per-index offsets; the same index pattern is reused for
  // both genders, scaled to the gender's vowel space.
  const double u = frac(speaker_id * 0.6180339887498949);
  const double v = frac(speaker_id * 0.7548776662466927);
  const double w = frac(speaker_id * 0.5698402909980532);
  const double scale = gender == Gender::Male ? 1.0 : 1.17;
  const double spread = spec.speaker_formant_spread;
  voice.f1 = 520.0 * scale * (1.0 + spread * 2.0 * (u - 0.5));
  voice.f2 = 1190.0 * scale * (1.0 + spread * 1.6 * (v - 0.5));
  voice.f3 = 2390.0 * scale * (1.0 + spread * 1.2 * (w - 0.5));
  return voice;
}

// Small vowel inventory; every sentence cycles through all of it so the
// train and test scripts cover the same sounds in different orders.
constexpr double kVowelF1Mult[3] = {1.00, 0.58, 0.62};
constexpr double kVowelF2Mult[3] = {1.00, 1.42, 0.76};

}  // namespace

std::vector<EmotionModulation> default_emotion_modulations(int count) {
  static const std::vector<EmotionModulation> kTable = {
      {1.00, 0.40, 0.0, 1.00},   // neutral
      {1.25, 1.60, 6.0, 1.25},   // anger
      {0.85, 0.25, -6.0, 0.80},  // sadness
      {1.15, 1.20, 3.0, 1.10},   // happiness
      {0.95, 0.70, -2.0, 0.90},  // disgust
      {1.30, 1.00, 1.0, 1.15},   // fear
  };
  if (count < 1 || count > static_cast<int>(kTable.size()))
    throw InvariantViolation("emotion count must be 1.." + std::to_string(kTable.size()));
  return {kTable.begin(), kTable.begin() + count};
}

SynthSpec separable_spec() {
  SynthSpec spec;
  spec.dims = {4, 3, 4, 5};
  spec.emotions = default_emotion_modulations(3);
  return spec;
}

SynthSpec desk_spec() {
  SynthSpec spec;
  spec.dims = {3, 3, 4, 3};
  spec.emotions = default_emotion_modulations(3);
  return spec;
}

SynthSpec csd_shape_spec() {
  SynthSpec spec;
  spec.dims = {25, 6, 8, 9};
  spec.emotions = default_emotion_modulations(6);
  return spec;
}

SynthSpec prosody_only_spec() {
  SynthSpec spec;
  spec.dims = {2, 3, 4, 5};
  spec.speaker_formant_spread = 0.0;
  spec.speaker_pitch_spread = 0.0;
  // Identical spectral envelopes and base pitch everywhere; the emotions
  // differ only in contour swing, loudness and rate, none of which the
  // gain-invariant cepstra can see well.
  spec.emotions = {
      {1.0, 0.40, 0.0, 1.00},
      {1.0, 1.60, 6.0, 1.25},
      {1.0, 0.25, -6.0, 0.80},
  };
  return spec;
}

SynthSpec spec_for_preset(const std::string &name) {
  if (name == "separable") return separable_spec();
  if (name == "desk") return desk_spec();
  if (name == "csd-shape") return csd_shape_spec();
  if (name == "prosody-only") return prosody_only_spec();
  throw InvariantViolation("unknown preset '" + name + "'");
}

AudioBuffer synthesize_utterance(const SynthSpec &spec, const UtteranceRecord &record) {
  if (record.emotion >= static_cast<int>(spec.emotions.size()))
    throw InvariantViolation("record emotion has no modulation entry");
  const EmotionModulation &emotion = spec.emotions[static_cast<std::size_t>(record.emotion)];
  const SpeakerVoice voice = speaker_voice(spec, record.gender, record.speaker_id);

  std::mt19937_64 rng(derive_seed(spec.rng_seed, gender_index(record.gender),
                                  record.speaker_id, record.emotion, record.sentence_id,
                                  record.repetition));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double base_duration =
      spec.duration_lo_s + (spec.duration_hi_s - spec.duration_lo_s) * uniform(rng);
  const double duration_s = base_duration / emotion.rate;
  const auto n_samples = static_cast<std::size_t>(duration_s * kSampleRateHz);

  // Per-repetition jitter keeps repeated sentences from being carbon copies.
  const double pitch_jitter = 1.0 + 0.015 * normal(rng);
  const double energy_jitter_db = 0.5 * normal(rng);
  const double contour_phase = uniform(rng);

  const int n_syllables = 3 + record.sentence_id % 3;

  const double pulse_amp =
      7.5 * std::pow(10.0, (emotion.energy_shift_db + energy_jitter_db) / 20.0);

  std::vector<double> samples(n_samples, 0.0);

  Resonator r1, r2, r3;
  double phase = 1.0;  // emit a pulse on the first voiced sample
  double pending_pulse = 0.0;
  // Glottal shaping (two-pole low-pass) then a radiation differentiator:
  // harmonics roll off about 6 dB per octave and DC cancels exactly.
  const double glottal_smoothing =
      1.0 - std::exp(-2.0 * std::numbers::pi * 300.0 / kSampleRateHz);
  double glottal1 = 0.0, glottal2 = 0.0, glottal_prev = 0.0;

  for (std::size_t i = 0; i < n_samples; ++i) {
    const double tau = static_cast<double>(i) / static_cast<double>(n_samples);

    const auto syllable = std::min<int>(static_cast<int>(tau * n_syllables), n_syllables - 1);
    const double in_syllable = tau * n_syllables - syllable;
    const bool voiced = in_syllable < 0.72;

    // Vowel targets change per syllable; the resonators are redesigned every
    // millisecond so the coefficients follow without zipper noise.
    if (i % 16 == 0) {
      const int vowel = (record.sentence_id * 2 + syllable) % 3;
      r1.design(voice.f1 * kVowelF1Mult[vowel], 70.0, 1.0);
      r2.design(voice.f2 * kVowelF2Mult[vowel], 90.0, 0.6);
      r3.design(voice.f3, 140.0, 0.3);
    }

    double impulse = pending_pulse;
    pending_pulse = 0.0;
    if (voiced) {
      const double contour = 0.06 * std::sin(2.0 * std::numbers::pi * (2.0 * tau + contour_phase)) -
                             0.12 * (tau - 0.5);
      const double f0 = voice.base_pitch_hz * emotion.pitch_shift * pitch_jitter *
                        (1.0 + emotion.pitch_variability * contour);
      const double increment = f0 / kSampleRateHz;
      phase += increment;
      if (phase >= 1.0) {
        phase -= 1.0;
        // Split the pulse across two samples so the train keeps its exact
        // fractional period instead of snapping to the sample grid.
        const double overshoot = std::min(phase / increment, 1.0);
        const double env_pos = in_syllable / 0.72;
        const double envelope = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi *
                                                      std::clamp(env_pos, 0.0, 1.0)));
        const double amplitude = pulse_amp * (0.25 + 0.75 * envelope);
        impulse += amplitude * (1.0 - overshoot);
        pending_pulse = amplitude * overshoot;
      }
    } else {
      phase = 1.0;
    }

    glottal1 += glottal_smoothing * (impulse - glottal1);
    glottal2 += glottal_smoothing * (glottal1 - glottal2);
    double source = glottal2 - glottal_prev;
    glottal_prev = glottal2;
    if (!voiced) source += 0.002 * normal(rng);  // breath noise between syllables

    samples[i] = r1.step(source) + r2.step(source) + r3.step(source);
  }

  double peak = 0.0;
  for (double s : samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.99) {
    const double rescale = 0.99 / peak;
    for (double &s : samples) s *= rescale;
  }

  AudioBuffer audio;
  audio.sample_rate_hz = kSampleRateHz;
  audio.samples = std::move(samples);
  return audio;
}

CorpusManifest synthesize_corpus(const SynthSpec &spec, const std::filesystem::path &out_dir,
                                 int threads) {
  if (static_cast<int>(spec.emotions.size()) != spec.dims.emotions)
    throw InvariantViolation("SynthSpec needs one modulation per emotion");

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "wav").string() + ": " + ec.message());

  CorpusManifest manifest;
  manifest.dims = spec.dims;
  manifest.root = out_dir;
  manifest.records = build_records(spec.dims);

  parallel_for(manifest.records.size(), threads, [&](std::size_t i) {
    const UtteranceRecord &record = manifest.records[i];
    const AudioBuffer audio = synthesize_utterance(spec, record);
    write_wav(audio, manifest.resolve(record));
  });

  save_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace emosid
