#include "emosid/registry.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "emosid/errors.hpp"
#include "emosid/frontend.hpp"
#include "emosid/numeric.hpp"
#include "emosid/parallel.hpp"
#include "emosid/prosody.hpp"

namespace emosid {

namespace {

constexpr int kRegistryFormatVersion = 1;

// Salts keep each model family on its own seed stream.
constexpr std::uint64_t kSeedGender = 0xa1;
constexpr std::uint64_t kSeedEmotion = 0xa2;
constexpr std::uint64_t kSeedSpeaker = 0xa3;
constexpr std::uint64_t kSeedOneStage = 0xa4;
constexpr std::uint64_t kSeedPooledSpeaker = 0xa5;
constexpr std::uint64_t kSeedPooledEmotion = 0xa6;

TrainingConfig with_seed(const TrainingConfig &base, std::uint64_t seed) {
  TrainingConfig config = base;
  config.rng_seed = seed;
  return config;
}

}  // namespace

AnalyzedUtterance analyze_utterance(const AudioBuffer &audio) {
  AnalyzedUtterance analyzed;
  analyzed.features = extract_features(audio);
  analyzed.prosody = suprasegmental_observations(audio);
  return analyzed;
}

long ModelRegistry::one_stage_count() const {
  long count = 0;
  for (const auto &per_gender : one_stage_models)
    for (const auto &per_speaker : per_gender) count += static_cast<long>(per_speaker.size());
  return count;
}

long ModelRegistry::speaker_model_count() const {
  long count = 0;
  for (const auto &per_gender : speaker_models)
    for (const auto &per_emotion : per_gender) count += static_cast<long>(per_emotion.size());
  return count;
}

long ModelRegistry::emotion_model_count() const {
  long count = 0;
  for (const auto &per_gender : emotion_models) count += static_cast<long>(per_gender.size());
  return count;
}

void validate_registry_shape(const ModelRegistry &registry) {
  const auto n = static_cast<std::size_t>(registry.speakers_per_gender);
  const auto m = static_cast<std::size_t>(registry.emotions());
  if (n == 0 || m == 0) throw InvariantViolation("registry has empty dimensions");
  if (registry.emotion_models.size() != 2 || registry.speaker_models.size() != 2 ||
      registry.one_stage_models.size() != 2)
    throw InvariantViolation("registry gender axis must have 2 entries");
  for (std::size_t g = 0; g < 2; ++g) {
    if (registry.emotion_models[g].size() != m)
      throw InvariantViolation("emotion model count disagrees with m");
    if (registry.speaker_models[g].size() != m)
      throw InvariantViolation("speaker model emotion axis disagrees with m");
    for (const auto &per_emotion : registry.speaker_models[g])
      if (per_emotion.size() != n)
        throw InvariantViolation("speaker model speaker axis disagrees with n");
    if (registry.one_stage_models[g].size() != n)
      throw InvariantViolation("one-stage speaker axis disagrees with n");
    for (const auto &per_speaker : registry.one_stage_models[g])
      if (per_speaker.size() != m)
        throw InvariantViolation("one-stage emotion axis disagrees with m");
  }
  if (registry.has_ablations) {
    if (registry.pooled_speaker_models.size() != 2 ||
        registry.pooled_speaker_models[0].size() != n ||
        registry.pooled_speaker_models[1].size() != n ||
        registry.pooled_emotion_models.size() != m)
      throw InvariantViolation("ablation model sets have wrong shapes");
  }
}

ModelRegistry train_registry(const CorpusManifest &manifest, const RegistryConfig &config) {
  const int n = manifest.dims.speakers_per_gender;
  const int m = manifest.dims.emotions;

  // Indices of training records per (gender, emotion, speaker) cell, in
  // manifest order so threading cannot reorder any model's data.
  std::vector<std::size_t> train_indices;
  std::vector<std::vector<std::vector<std::vector<std::size_t>>>> cells(
      2, std::vector<std::vector<std::vector<std::size_t>>>(
             static_cast<std::size_t>(m),
             std::vector<std::vector<std::size_t>>(static_cast<std::size_t>(n))));
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const UtteranceRecord &record = manifest.records[i];
    if (record.split != Split::Train) continue;
    train_indices.push_back(i);
    cells[gender_index(record.gender)][static_cast<std::size_t>(record.emotion)]
         [static_cast<std::size_t>(record.speaker_id - 1)]
             .push_back(i);
  }
  for (std::size_t g = 0; g < 2; ++g)
    for (int e = 0; e < m; ++e)
      for (int s = 0; s < n; ++s)
        if (cells[g][static_cast<std::size_t>(e)][static_cast<std::size_t>(s)].empty())
          throw MissingCell(std::string(1, gender_to_char(kGenders[g])) + "/" +
                            std::string(kEmotionNames[static_cast<std::size_t>(e)]) +
                            "/speaker " + std::to_string(s + 1) + " has no training data");

  // Analyze every training utterance once.
  std::vector<AnalyzedUtterance> analyzed(manifest.records.size());
  parallel_for(train_indices.size(), config.threads, [&](std::size_t k) {
    const std::size_t i = train_indices[k];
    analyzed[i] = analyze_utterance(ingest_wav(manifest.resolve(manifest.records[i])));
  });

  auto features_of = [&](const std::vector<std::size_t> &indices) {
    std::vector<FeatureMatrix> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(analyzed[i].features);
    return out;
  };
  auto utterances_of = [&](const std::vector<std::size_t> &indices) {
    std::vector<AnalyzedUtterance> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(analyzed[i]);
    return out;
  };

  ModelRegistry registry;
  registry.speakers_per_gender = n;
  for (int e = 0; e < m; ++e)
    registry.emotion_names.emplace_back(kEmotionNames[static_cast<std::size_t>(e)]);
  registry.config_hash = hash_config(config.training);
  registry.emotion_models.assign(2, std::vector<Sphmm>(static_cast<std::size_t>(m)));
  registry.speaker_models.assign(
      2, std::vector<std::vector<GmmHmm>>(static_cast<std::size_t>(m),
                                          std::vector<GmmHmm>(static_cast<std::size_t>(n))));
  registry.one_stage_models.assign(
      2, std::vector<std::vector<Sphmm>>(static_cast<std::size_t>(n),
                                         std::vector<Sphmm>(static_cast<std::size_t>(m))));
  if (config.train_ablations) {
    registry.has_ablations = true;
    registry.pooled_speaker_models.assign(2, std::vector<Sphmm>(static_cast<std::size_t>(n)));
    registry.pooled_emotion_models.resize(static_cast<std::size_t>(m));
  }

  // Flatten every model to train into one task list.
  struct Task {
    enum Kind { Gender, Emotion, Speaker, OneStage, PooledSpeaker, PooledEmotion } kind;
    std::size_t g = 0;
    int e = 0;
    int s = 0;
  };
  std::vector<Task> tasks;
  for (std::size_t g = 0; g < 2; ++g) tasks.push_back({Task::Gender, g, 0, 0});
  for (std::size_t g = 0; g < 2; ++g)
    for (int e = 0; e < m; ++e) tasks.push_back({Task::Emotion, g, e, 0});
  for (std::size_t g = 0; g < 2; ++g)
    for (int e = 0; e < m; ++e)
      for (int s = 0; s < n; ++s) tasks.push_back({Task::Speaker, g, e, s});
  for (std::size_t g = 0; g < 2; ++g)
    for (int s = 0; s < n; ++s)
      for (int e = 0; e < m; ++e) tasks.push_back({Task::OneStage, g, e, s});
  if (config.train_ablations) {
    for (std::size_t g = 0; g < 2; ++g)
      for (int s = 0; s < n; ++s) tasks.push_back({Task::PooledSpeaker, g, 0, s});
    for (int e = 0; e < m; ++e) tasks.push_back({Task::PooledEmotion, 0, e, 0});
  }

  auto cell = [&](std::size_t g, int e, int s) -> const std::vector<std::size_t> & {
    return cells[g][static_cast<std::size_t>(e)][static_cast<std::size_t>(s)];
  };

  registry.training_counts.per_speaker = static_cast<long>(cell(0, 0, 0).size());
  registry.training_counts.per_one_stage = registry.training_counts.per_speaker;
  for (int s = 0; s < n; ++s)
    registry.training_counts.per_emotion += static_cast<long>(cell(0, 0, s).size());
  for (int e = 0; e < m; ++e)
    for (int s = 0; s < n; ++s)
      registry.training_counts.per_gender += static_cast<long>(cell(0, e, s).size());

  parallel_for(tasks.size(), config.threads, [&](std::size_t task_index) {
    const Task &task = tasks[task_index];
    const auto eu = static_cast<std::size_t>(task.e);
    const auto su = static_cast<std::size_t>(task.s);
    switch (task.kind) {
      case Task::Gender: {
        std::vector<std::size_t> indices;
        for (int e = 0; e < m; ++e)
          for (int s = 0; s < n; ++s) {
            const auto &c = cell(task.g, e, s);
            indices.insert(indices.end(), c.begin(), c.end());
          }
        const auto obs = features_of(indices);
        registry.gender_models[task.g] = train_hmm(
            obs, kAcousticStates, with_seed(config.training,
                                            derive_seed(config.training.rng_seed, kSeedGender,
                                                        task.g)));
        break;
      }
      case Task::Emotion: {
        std::vector<std::size_t> indices;
        for (int s = 0; s < n; ++s) {
          const auto &c = cell(task.g, task.e, s);
          indices.insert(indices.end(), c.begin(), c.end());
        }
        const auto utterances = utterances_of(indices);
        registry.emotion_models[task.g][eu] = train_sphmm(
            utterances, with_seed(config.training,
                                  derive_seed(config.training.rng_seed, kSeedEmotion, task.g,
                                              task.e)));
        break;
      }
      case Task::Speaker: {
        const auto &indices = cell(task.g, task.e, task.s);
        const auto obs = features_of(indices);
        registry.speaker_models[task.g][eu][su] = train_hmm(
            obs, kAcousticStates, with_seed(config.training,
                                            derive_seed(config.training.rng_seed, kSeedSpeaker,
                                                        task.g, task.e, task.s)));
        break;
      }
      case Task::OneStage: {
        const auto &indices = cell(task.g, task.e, task.s);
        const auto utterances = utterances_of(indices);
        registry.one_stage_models[task.g][su][eu] = train_sphmm(
            utterances, with_seed(config.training,
                                  derive_seed(config.training.rng_seed, kSeedOneStage, task.g,
                                              task.e, task.s)));
        break;
      }
      case Task::PooledSpeaker: {
        std::vector<std::size_t> indices;
        for (int e = 0; e < m; ++e) {
          const auto &c = cell(task.g, e, task.s);
          indices.insert(indices.end(), c.begin(), c.end());
        }
        const auto utterances = utterances_of(indices);
        registry.pooled_speaker_models[task.g][su] = train_sphmm(
            utterances, with_seed(config.training,
                                  derive_seed(config.training.rng_seed, kSeedPooledSpeaker,
                                              task.g, task.s)));
        break;
      }
      case Task::PooledEmotion: {
        std::vector<std::size_t> indices;
        for (std::size_t g = 0; g < 2; ++g)
          for (int s = 0; s < n; ++s) {
            const auto &c = cell(g, task.e, s);
            indices.insert(indices.end(), c.begin(), c.end());
          }
        const auto utterances = utterances_of(indices);
        registry.pooled_emotion_models[eu] = train_sphmm(
            utterances, with_seed(config.training,
                                  derive_seed(config.training.rng_seed, kSeedPooledEmotion,
                                              task.e)));
        break;
      }
    }
  });

  validate_registry_shape(registry);
  return registry;
}

std::uint64_t hash_config(const TrainingConfig &config) {
  std::ostringstream canonical;
  canonical << "max_iterations=" << config.max_iterations
            << ";rel_ll_tolerance=" << config.rel_ll_tolerance
            << ";n_mixtures=" << config.n_mixtures
            << ";variance_floor_scale=" << config.variance_floor_scale
            << ";rng_seed=" << config.rng_seed;
  return fnv1a(canonical.str());
}

void save_registry(const ModelRegistry &registry, const std::filesystem::path &dir) {
  validate_registry_shape(registry);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json manifest;
  manifest["format_version"] = kRegistryFormatVersion;
  manifest["speakers_per_gender"] = registry.speakers_per_gender;
  manifest["emotions"] = registry.emotion_names;
  manifest["has_ablations"] = registry.has_ablations;
  std::ostringstream hash_hex;
  hash_hex << std::hex << registry.config_hash;
  manifest["config_hash"] = hash_hex.str();
  manifest["training_counts"] = {{"per_gender", registry.training_counts.per_gender},
                                 {"per_emotion", registry.training_counts.per_emotion},
                                 {"per_speaker", registry.training_counts.per_speaker},
                                 {"per_one_stage", registry.training_counts.per_one_stage}};

  std::vector<std::string> files;
  auto emit_hmm = [&](const GmmHmm &model, const std::string &name) {
    save_hmm(model, dir / name);
    files.push_back(name);
  };
  auto emit_sphmm = [&](const Sphmm &model, const std::string &name) {
    save_sphmm(model, dir / name);
    files.push_back(name);
  };

  const int n = registry.speakers_per_gender;
  const int m = registry.emotions();
  for (std::size_t g = 0; g < 2; ++g) {
    const char gc = gender_to_char(kGenders[g]);
    emit_hmm(registry.gender_models[g], std::string("gender_") + gc + ".hmm");
    for (int e = 0; e < m; ++e) {
      const std::string &emotion = registry.emotion_names[static_cast<std::size_t>(e)];
      emit_sphmm(registry.emotion_models[g][static_cast<std::size_t>(e)],
                 std::string("emotion_") + gc + "_" + emotion + ".sphmm");
      for (int s = 0; s < n; ++s)
        emit_hmm(registry.speaker_models[g][static_cast<std::size_t>(e)]
                                         [static_cast<std::size_t>(s)],
                 std::string("speaker_") + gc + "_" + emotion + "_" +
                     std::to_string(s + 1) + ".hmm");
    }
    for (int s = 0; s < n; ++s)
      for (int e = 0; e < m; ++e) {
        const std::string &emotion = registry.emotion_names[static_cast<std::size_t>(e)];
        emit_sphmm(registry.one_stage_models[g][static_cast<std::size_t>(s)]
                                            [static_cast<std::size_t>(e)],
                   std::string("onestage_") + gc + "_" + std::to_string(s + 1) + "_" +
                       emotion + ".sphmm");
      }
    if (registry.has_ablations)
      for (int s = 0; s < n; ++s)
        emit_sphmm(registry.pooled_speaker_models[g][static_cast<std::size_t>(s)],
                   std::string("pooled_speaker_") + gc + "_" + std::to_string(s + 1) +
                       ".sphmm");
  }
  if (registry.has_ablations)
    for (int e = 0; e < m; ++e)
      emit_sphmm(registry.pooled_emotion_models[static_cast<std::size_t>(e)],
                 "pooled_emotion_" +
                     registry.emotion_names[static_cast<std::size_t>(e)] +
                     ".sphmm");

  manifest["files"] = files;
  std::ofstream out(dir / "registry.json");
  if (!out) throw IoError("cannot write " + (dir / "registry.json").string());
  out << manifest.dump(2) << '\n';
}

ModelRegistry load_registry(const std::filesystem::path &dir) {
  std::ifstream in(dir / "registry.json");
  if (!in) throw IoError("cannot open " + (dir / "registry.json").string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError("bad registry.json: " + std::string(e.what()));
  }
  if (manifest.at("format_version").get<int>() != kRegistryFormatVersion)
    throw UnsupportedFormat("registry format version mismatch");

  ModelRegistry registry;
  registry.speakers_per_gender = manifest.at("speakers_per_gender").get<int>();
  registry.emotion_names = manifest.at("emotions").get<std::vector<std::string>>();
  registry.has_ablations = manifest.at("has_ablations").get<bool>();
  registry.config_hash =
      std::stoull(manifest.at("config_hash").get<std::string>(), nullptr, 16);
  const auto &counts = manifest.at("training_counts");
  registry.training_counts.per_gender = counts.at("per_gender").get<long>();
  registry.training_counts.per_emotion = counts.at("per_emotion").get<long>();
  registry.training_counts.per_speaker = counts.at("per_speaker").get<long>();
  registry.training_counts.per_one_stage = counts.at("per_one_stage").get<long>();

  const int n = registry.speakers_per_gender;
  const int m = registry.emotions();
  registry.emotion_models.assign(2, std::vector<Sphmm>(static_cast<std::size_t>(m)));
  registry.speaker_models.assign(
      2, std::vector<std::vector<GmmHmm>>(static_cast<std::size_t>(m),
                                          std::vector<GmmHmm>(static_cast<std::size_t>(n))));
  registry.one_stage_models.assign(
      2, std::vector<std::vector<Sphmm>>(static_cast<std::size_t>(n),
                                         std::vector<Sphmm>(static_cast<std::size_t>(m))));
  if (registry.has_ablations) {
    registry.pooled_speaker_models.assign(2, std::vector<Sphmm>(static_cast<std::size_t>(n)));
    registry.pooled_emotion_models.resize(static_cast<std::size_t>(m));
  }

  for (std::size_t g = 0; g < 2; ++g) {
    const char gc = gender_to_char(kGenders[g]);
    registry.gender_models[g] = load_hmm(dir / (std::string("gender_") + gc + ".hmm"));
    for (int e = 0; e < m; ++e) {
      const std::string &emotion = registry.emotion_names[static_cast<std::size_t>(e)];
      registry.emotion_models[g][static_cast<std::size_t>(e)] = load_sphmm(
          dir / (std::string("emotion_") + gc + "_" + emotion + ".sphmm"));
      for (int s = 0; s < n; ++s)
        registry.speaker_models[g][static_cast<std::size_t>(e)][static_cast<std::size_t>(s)] =
            load_hmm(dir / (std::string("speaker_") + gc + "_" + emotion +
                            "_" + std::to_string(s + 1) + ".hmm"));
    }
    for (int s = 0; s < n; ++s)
      for (int e = 0; e < m; ++e) {
        const std::string &emotion = registry.emotion_names[static_cast<std::size_t>(e)];
        registry.one_stage_models[g][static_cast<std::size_t>(s)][static_cast<std::size_t>(e)] =
            load_sphmm(dir / (std::string("onestage_") + gc + "_" + std::to_string(s + 1) +
                              "_" + emotion + ".sphmm"));
      }
    if (registry.has_ablations)
      for (int s = 0; s < n; ++s)
        registry.pooled_speaker_models[g][static_cast<std::size_t>(s)] = load_sphmm(
            dir / (std::string("pooled_speaker_") + gc + "_" + std::to_string(s + 1) +
                   ".sphmm"));
  }
  if (registry.has_ablations)
    for (int e = 0; e < m; ++e)
      registry.pooled_emotion_models[static_cast<std::size_t>(e)] = load_sphmm(
          dir / ("pooled_emotion_" +
                 registry.emotion_names[static_cast<std::size_t>(e)] +
                 ".sphmm"));

  validate_registry_shape(registry);
  return registry;
}

}  // namespace emosid
