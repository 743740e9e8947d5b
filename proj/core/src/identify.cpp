#include "emosid/identify.hpp"

#include <string>

#include "emosid/errors.hpp"

namespace emosid {

namespace {

void check_registry_label(const ModelRegistry &registry, std::optional<Gender> gender,
                          std::optional<int> emotion) {
  (void)gender;  // both genders always exist
  if (emotion && (*emotion < 0 || *emotion >= registry.emotions()))
    throw UnknownLabel("emotion index " + std::to_string(*emotion) +
                       " outside the registry's emotion set");
}

}  // namespace

std::string label_to_string(const Label &label, const ModelRegistry &registry) {
  std::string out(1, gender_to_char(label.gender));
  out += "/";
  out += label.emotion >= 0 ? registry.emotion_names[static_cast<std::size_t>(label.emotion)]
                            : std::string("-");
  out += "/speaker ";
  out += label.speaker_id >= 1 ? std::to_string(label.speaker_id) : std::string("-");
  return out;
}

std::string approach_name(Approach approach) {
  switch (approach) {
    case Approach::OneStage: return "one-stage";
    case Approach::ThreeStage: return "three-stage";
    case Approach::Exp1: return "exp1";
    case Approach::Exp2: return "exp2";
    case Approach::Exp3: return "exp3";
  }
  return "unknown";
}

Approach approach_from_name(const std::string &name) {
  if (name == "one-stage") return Approach::OneStage;
  if (name == "three-stage") return Approach::ThreeStage;
  if (name == "exp1") return Approach::Exp1;
  if (name == "exp2") return Approach::Exp2;
  if (name == "exp3") return Approach::Exp3;
  throw InvariantViolation("unknown approach '" + name + "'");
}

std::size_t pick_argmax(const std::vector<ScoredCandidate> &candidates) {
  if (candidates.empty()) throw InvariantViolation("argmax over no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i].score > candidates[best].score) best = i;
  return best;
}

IdentificationResult identify_one_stage(const ModelRegistry &registry,
                                        const FeatureSequence &acoustic_obs,
                                        const SuprasegmentalSequence &pros_obs, Alpha alpha,
                                        bool normalize) {
  const int n = registry.speakers_per_gender;
  const int m = registry.emotions();

  StageScores stage{"one-stage", {}};
  stage.candidates.reserve(static_cast<std::size_t>(2 * n * m));
  // Canonical (gender, speaker, emotion) order doubles as the tie-break.
  for (std::size_t g = 0; g < 2; ++g)
    for (int s = 0; s < n; ++s)
      for (int e = 0; e < m; ++e) {
        const Sphmm &model =
            registry.one_stage_models[g][static_cast<std::size_t>(s)][static_cast<std::size_t>(e)];
        stage.candidates.push_back(
            {Label{kGenders[g], e, s + 1},
             combined_log_prob(model, acoustic_obs, pros_obs, alpha, normalize)});
      }

  IdentificationResult result;
  result.approach = Approach::OneStage;
  result.predicted = stage.candidates[pick_argmax(stage.candidates)].label;
  result.stages.push_back(std::move(stage));
  return result;
}

std::pair<Gender, StageScores> identify_gender(const ModelRegistry &registry,
                                               const FeatureSequence &acoustic_obs) {
  StageScores stage{"gender", {}};
  for (std::size_t g = 0; g < 2; ++g)
    stage.candidates.push_back({Label{kGenders[g], -1, -1},
                                log_forward(registry.gender_models[g], acoustic_obs)});
  const Gender decided = stage.candidates[pick_argmax(stage.candidates)].label.gender;
  return {decided, std::move(stage)};
}

std::pair<int, StageScores> identify_emotion(const ModelRegistry &registry, Gender gender,
                                             const FeatureSequence &acoustic_obs,
                                             const SuprasegmentalSequence &pros_obs,
                                             Alpha alpha, bool normalize) {
  StageScores stage{"emotion", {}};
  const auto g = gender_index(gender);
  for (int e = 0; e < registry.emotions(); ++e)
    stage.candidates.push_back(
        {Label{gender, e, -1},
         combined_log_prob(registry.emotion_models[g][static_cast<std::size_t>(e)],
                           acoustic_obs, pros_obs, alpha, normalize)});
  const int decided = stage.candidates[pick_argmax(stage.candidates)].label.emotion;
  return {decided, std::move(stage)};
}

std::pair<int, StageScores> identify_speaker(const ModelRegistry &registry, Gender gender,
                                             int emotion, const FeatureSequence &acoustic_obs) {
  check_registry_label(registry, gender, emotion);
  StageScores stage{"speaker", {}};
  const auto g = gender_index(gender);
  for (int s = 0; s < registry.speakers_per_gender; ++s)
    stage.candidates.push_back(
        {Label{gender, emotion, s + 1},
         log_forward(registry.speaker_models[g][static_cast<std::size_t>(emotion)]
                                             [static_cast<std::size_t>(s)],
                     acoustic_obs)});
  const int decided = stage.candidates[pick_argmax(stage.candidates)].label.speaker_id;
  return {decided, std::move(stage)};
}

IdentificationResult identify_three_stage(const ModelRegistry &registry,
                                          const FeatureSequence &acoustic_obs,
                                          const SuprasegmentalSequence &pros_obs, Alpha alpha,
                                          bool normalize, const StageOverrides &overrides) {
  check_registry_label(registry, overrides.gender, overrides.emotion);

  IdentificationResult result;
  result.approach = Approach::ThreeStage;

  auto [gender_decided, gender_stage] = identify_gender(registry, acoustic_obs);
  result.predicted.gender = gender_decided;
  const Gender gender_forward = overrides.gender.value_or(gender_decided);
  result.stages.push_back(std::move(gender_stage));

  auto [emotion_decided, emotion_stage] =
      identify_emotion(registry, gender_forward, acoustic_obs, pros_obs, alpha, normalize);
  result.predicted.emotion = emotion_decided;
  const int emotion_forward = overrides.emotion.value_or(emotion_decided);
  result.stages.push_back(std::move(emotion_stage));

  auto [speaker_decided, speaker_stage] =
      identify_speaker(registry, gender_forward, emotion_forward, acoustic_obs);
  result.predicted.speaker_id = speaker_decided;
  result.stages.push_back(std::move(speaker_stage));

  // When a stage is overridden, the label the cascade commits to is the one
  // the downstream stages were conditioned on.
  if (overrides.gender) result.predicted.gender = *overrides.gender;
  if (overrides.emotion) result.predicted.emotion = *overrides.emotion;
  return result;
}

IdentificationResult identify_ablation(const ModelRegistry &registry, Approach mode,
                                       const FeatureSequence &acoustic_obs,
                                       const SuprasegmentalSequence &pros_obs, Alpha alpha,
                                       bool normalize) {
  if (!registry.has_ablations)
    throw AblationModelsMissing("registry was trained without ablation model sets");
  const int n = registry.speakers_per_gender;
  const int m = registry.emotions();

  IdentificationResult result;
  result.approach = mode;

  switch (mode) {
    case Approach::Exp1: {
      // Gender stage, then emotion-pooled speaker models of that gender.
      auto [gender_decided, gender_stage] = identify_gender(registry, acoustic_obs);
      result.stages.push_back(std::move(gender_stage));
      StageScores stage{"speaker", {}};
      const auto g = gender_index(gender_decided);
      for (int s = 0; s < n; ++s)
        stage.candidates.push_back(
            {Label{gender_decided, -1, s + 1},
             combined_log_prob(registry.pooled_speaker_models[g][static_cast<std::size_t>(s)],
                               acoustic_obs, pros_obs, alpha, normalize)});
      result.predicted = stage.candidates[pick_argmax(stage.candidates)].label;
      result.stages.push_back(std::move(stage));
      break;
    }
    case Approach::Exp2: {
      // Gender-pooled emotion stage, then that emotion's speaker models of
      // both genders.
      StageScores emotion_stage{"emotion", {}};
      for (int e = 0; e < m; ++e)
        emotion_stage.candidates.push_back(
            {Label{Gender::Male, e, -1},
             combined_log_prob(registry.pooled_emotion_models[static_cast<std::size_t>(e)],
                               acoustic_obs, pros_obs, alpha, normalize)});
      const int emotion_decided =
          emotion_stage.candidates[pick_argmax(emotion_stage.candidates)].label.emotion;
      result.stages.push_back(std::move(emotion_stage));

      StageScores stage{"speaker", {}};
      for (std::size_t g = 0; g < 2; ++g)
        for (int s = 0; s < n; ++s)
          stage.candidates.push_back(
              {Label{kGenders[g], emotion_decided, s + 1},
               log_forward(registry.speaker_models[g][static_cast<std::size_t>(emotion_decided)]
                                                   [static_cast<std::size_t>(s)],
                           acoustic_obs)});
      result.predicted = stage.candidates[pick_argmax(stage.candidates)].label;
      result.stages.push_back(std::move(stage));
      break;
    }
    case Approach::Exp3: {
      // Fully pooled: all 2n emotion-pooled speaker models at once.
      StageScores stage{"speaker", {}};
      for (std::size_t g = 0; g < 2; ++g)
        for (int s = 0; s < n; ++s)
          stage.candidates.push_back(
              {Label{kGenders[g], -1, s + 1},
               combined_log_prob(registry.pooled_speaker_models[g][static_cast<std::size_t>(s)],
                                 acoustic_obs, pros_obs, alpha, normalize)});
      result.predicted = stage.candidates[pick_argmax(stage.candidates)].label;
      result.stages.push_back(std::move(stage));
      break;
    }
    default:
      throw InvariantViolation("identify_ablation expects exp1, exp2 or exp3");
  }
  return result;
}

}  // namespace emosid
