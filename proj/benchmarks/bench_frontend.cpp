#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "emosid/frontend.hpp"
#include "emosid/prosody.hpp"

namespace {

emosid::AudioBuffer one_second_tone() {
  emosid::AudioBuffer audio;
  audio.samples.resize(16000);
  for (std::size_t i = 0; i < audio.samples.size(); ++i)
    audio.samples[i] =
        0.4 * std::sin(2.0 * std::numbers::pi * 180.0 * i / emosid::kSampleRateHz);
  return audio;
}

void BM_extract_features(benchmark::State &state) {
  const emosid::AudioBuffer audio = one_second_tone();
  for (auto _ : state) benchmark::DoNotOptimize(emosid::extract_features(audio));
}
BENCHMARK(BM_extract_features)->Unit(benchmark::kMillisecond);

void BM_estimate_pitch(benchmark::State &state) {
  emosid::Frame frame{};
  for (std::size_t i = 0; i < frame.size(); ++i)
    frame[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 150.0 * i / emosid::kSampleRateHz);
  for (auto _ : state) benchmark::DoNotOptimize(emosid::estimate_pitch(frame));
}
BENCHMARK(BM_estimate_pitch)->Unit(benchmark::kMicrosecond);

void BM_suprasegmental_observations(benchmark::State &state) {
  const emosid::AudioBuffer audio = one_second_tone();
  for (auto _ : state)
    benchmark::DoNotOptimize(emosid::suprasegmental_observations(audio));
}
BENCHMARK(BM_suprasegmental_observations)->Unit(benchmark::kMillisecond);

}  // namespace
