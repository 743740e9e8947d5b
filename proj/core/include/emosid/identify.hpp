#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emosid/registry.hpp"

namespace emosid {

/// A (gender, emotion, speaker) decision. Components a given approach does
/// not predict are left at -1.
struct Label {
  Gender gender = Gender::Male;
  int emotion = -1;     // index into the registry's emotion list
  int speaker_id = -1;  // 1..n within the gender

  friend bool operator==(const Label &, const Label &) = default;
};

std::string label_to_string(const Label &label, const ModelRegistry &registry);

enum class Approach { OneStage, ThreeStage, Exp1, Exp2, Exp3 };

std::string approach_name(Approach approach);
Approach approach_from_name(const std::string &name);

struct ScoredCandidate {
  Label label;
  double score = 0.0;
};

struct StageScores {
  std::string stage;
  std::vector<ScoredCandidate> candidates;
};

struct IdentificationResult {
  Label predicted;
  std::vector<StageScores> stages;
  Approach approach = Approach::ThreeStage;
};

/// Forced stage outputs for the worst-case protocol; when set, the value is
/// fed forward instead of the stage's own argmax (the stage still runs and
/// its scores are recorded).
struct StageOverrides {
  std::optional<Gender> gender;
  std::optional<int> emotion;
};

/// Argmax with the documented tie-break: candidates are scanned in canonical
/// key order and only a strictly larger score displaces the incumbent.
std::size_t pick_argmax(const std::vector<ScoredCandidate> &candidates);

IdentificationResult identify_one_stage(const ModelRegistry &registry,
                                        const FeatureSequence &acoustic_obs,
                                        const SuprasegmentalSequence &pros_obs, Alpha alpha,
                                        bool normalize = true);

/// Binary gender decision over the two acoustic gender models; ties go to M.
std::pair<Gender, StageScores> identify_gender(const ModelRegistry &registry,
                                               const FeatureSequence &acoustic_obs);

/// Gender-specific emotion decision over the m combined models.
std::pair<int, StageScores> identify_emotion(const ModelRegistry &registry, Gender gender,
                                             const FeatureSequence &acoustic_obs,
                                             const SuprasegmentalSequence &pros_obs,
                                             Alpha alpha, bool normalize = true);

/// Gender- and emotion-specific speaker decision over the n acoustic models.
std::pair<int, StageScores> identify_speaker(const ModelRegistry &registry, Gender gender,
                                             int emotion, const FeatureSequence &acoustic_obs);

IdentificationResult identify_three_stage(const ModelRegistry &registry,
                                          const FeatureSequence &acoustic_obs,
                                          const SuprasegmentalSequence &pros_obs, Alpha alpha,
                                          bool normalize = true,
                                          const StageOverrides &overrides = {});

/// Exp1: gender stage then emotion-pooled speaker models of that gender.
/// Exp2: gender-pooled emotion stage then the emotion's speaker models of
/// both genders. Exp3: one argmax over all emotion-pooled speaker models.
IdentificationResult identify_ablation(const ModelRegistry &registry, Approach mode,
                                       const FeatureSequence &acoustic_obs,
                                       const SuprasegmentalSequence &pros_obs, Alpha alpha,
                                       bool normalize = true);

}  // namespace emosid
