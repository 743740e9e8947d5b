#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emosid/audio.hpp"
#include "emosid/corpus.hpp"

namespace emosid {

/// Per-emotion prosodic modulation applied on top of the speaker's voice.
struct EmotionModulation {
  double pitch_shift = 1.0;       // multiplies the base pitch
  double pitch_variability = 1.0; // scales contour swing and declination
  double energy_shift_db = 0.0;
  double rate = 1.0;              // >1 speaks faster (shorter utterances)
};

struct PitchRangeHz {
  double lo = 0.0;
  double hi = 0.0;
};

/// Parameters of the source-filter generator that stands in for a recorded
/// corpus: glottal pulse train at a speaker- and gender-dependent pitch,
/// shaped by speaker-dependent resonances, modulated per emotion.
struct SynthSpec {
  CorpusDims dims{4, 3, 4, 5};
  PitchRangeHz male_pitch{90.0, 140.0};
  PitchRangeHz female_pitch{180.0, 260.0};
  double speaker_formant_spread = 0.12;  // 0 gives every speaker the same envelope
  double speaker_pitch_spread = 1.0;     // 0 gives every speaker the gender's center pitch
  double duration_lo_s = 0.9;
  double duration_hi_s = 1.3;
  std::vector<EmotionModulation> emotions;  // one per emotion index, size dims.emotions
  std::uint64_t rng_seed = 42;
};

/// Modulations for the canonical emotion list (neutral, anger, sadness,
/// happiness, disgust, fear), truncated to the first `count`.
std::vector<EmotionModulation> default_emotion_modulations(int count);

// Built-in presets.
SynthSpec separable_spec();     // n=4, m=3, 4 sentences, 5 repetitions
SynthSpec desk_spec();          // n=3, m=3, 4 sentences, 3 repetitions
SynthSpec csd_shape_spec();     // n=25, m=6, 8 sentences, 9 repetitions
SynthSpec prosody_only_spec();  // identical spectral envelopes across speakers

SynthSpec spec_for_preset(const std::string &name);

/// Deterministic per (spec seed, record key); independent of generation order.
AudioBuffer synthesize_utterance(const SynthSpec &spec, const UtteranceRecord &record);

/// Generates the WAV tree plus manifest.csv under out_dir. Parallel runs
/// produce bit-identical corpora because every utterance derives its own
/// seed from the master seed and record key.
CorpusManifest synthesize_corpus(const SynthSpec &spec, const std::filesystem::path &out_dir,
                                 int threads = 1);

}  // namespace emosid
