#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emosid/corpus.hpp"
#include "emosid/sphmm.hpp"

namespace emosid {

AnalyzedUtterance analyze_utterance(const AudioBuffer &audio);

struct RegistryConfig {
  TrainingConfig training;
  bool train_ablations = false;
  int threads = 1;
};

/// Utterances per trained model, uniform across a complete corpus (a
/// full-shape corpus yields 5400 / 900 / 36 / 36).
struct TrainingCounts {
  long per_gender = 0;
  long per_emotion = 0;
  long per_speaker = 0;
  long per_one_stage = 0;
};

/// The trained model hierarchy. Gender models and per-cell speaker models
/// are acoustic HMMs; emotion and one-stage models pair them with
/// suprasegmental models. Immutable once trained; scoring is thread-safe.
struct ModelRegistry {
  int speakers_per_gender = 0;
  std::vector<std::string> emotion_names;

  std::array<GmmHmm, 2> gender_models;                            // [gender]
  std::vector<std::vector<Sphmm>> emotion_models;                 // [gender][emotion]
  std::vector<std::vector<std::vector<GmmHmm>>> speaker_models;   // [gender][emotion][speaker]
  std::vector<std::vector<std::vector<Sphmm>>> one_stage_models;  // [gender][speaker][emotion]

  // Optional ablation sets: per-speaker models pooled across emotions
  // (used both gender-conditioned and fully pooled) and gender-pooled
  // emotion models.
  bool has_ablations = false;
  std::vector<std::vector<Sphmm>> pooled_speaker_models;  // [gender][speaker]
  std::vector<Sphmm> pooled_emotion_models;               // [emotion]

  TrainingCounts training_counts;
  std::uint64_t config_hash = 0;

  int emotions() const { return static_cast<int>(emotion_names.size()); }
  long one_stage_count() const;
  long speaker_model_count() const;
  long emotion_model_count() const;
  long gender_model_count() const { return 2; }
};

void validate_registry_shape(const ModelRegistry &registry);

/// Trains the full hierarchy from the manifest's training split. Gender
/// models pool everything of one gender; emotion models pool speakers within
/// a gender; speaker models stay inside their (gender, emotion) cell; the
/// one-stage set holds one combined model per (gender, speaker, emotion).
ModelRegistry train_registry(const CorpusManifest &manifest, const RegistryConfig &config);

/// Directory layout: registry.json plus one model file per key.
void save_registry(const ModelRegistry &registry, const std::filesystem::path &dir);
ModelRegistry load_registry(const std::filesystem::path &dir);

std::uint64_t hash_config(const TrainingConfig &config);

}  // namespace emosid
