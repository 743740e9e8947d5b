#pragma once

#include <filesystem>

#include "emosid/eval.hpp"
#include "emosid/synth.hpp"

namespace emosid::test {

// A tiny well-separated corpus plus a registry trained on it, built once per
// test binary. Two speakers per gender, two emotions, two sentences (one
// train, one test), two repetitions.
struct MicroFixture {
  CorpusManifest manifest;
  ModelRegistry registry;
  std::filesystem::path dir;
};

inline const MicroFixture &micro_fixture() {
  static const MicroFixture fixture = [] {
    MicroFixture f;
    f.dir = std::filesystem::temp_directory_path() / "emosid_unit" / "micro_corpus";
    std::filesystem::remove_all(f.dir);

    SynthSpec spec = separable_spec();
    spec.dims = {2, 2, 2, 2};
    spec.emotions = default_emotion_modulations(2);
    spec.speaker_formant_spread = 0.22;  // extra separation at this tiny scale
    spec.rng_seed = 1234;
    f.manifest = synthesize_corpus(spec, f.dir, 2);

    RegistryConfig config;
    config.training.max_iterations = 8;
    config.training.n_mixtures = 2;
    config.training.rng_seed = 7;
    config.train_ablations = true;
    config.threads = 2;
    f.registry = train_registry(f.manifest, config);
    return f;
  }();
  return fixture;
}

inline AnalyzedUtterance analyze_record(const MicroFixture &f, const UtteranceRecord &record) {
  return analyze_utterance(ingest_wav(f.manifest.resolve(record)));
}

}  // namespace emosid::test
