#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "emosid/errors.hpp"
#include "emosid/eval.hpp"
#include "emosid/numeric.hpp"
#include "emosid/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

// Settings shared by the subcommands; a JSON config file supplies values for
// anything the command line leaves unset (flag > config > default).
struct Settings {
  std::string config_path;

  double alpha = 0.5;
  bool normalize = true;
  std::uint64_t seed = 42;
  int threads = 1;
  bool ablations = false;

  emosid::TrainingConfig training;
  emosid::SynthSpec synth = emosid::separable_spec();
  std::string preset = "separable";
};

void apply_config_file(Settings &settings, const CLI::App &cmd) {
  if (settings.config_path.empty()) return;
  std::ifstream in(settings.config_path);
  if (!in) throw emosid::IoError("cannot open config " + settings.config_path);
  json config;
  try {
    in >> config;
  } catch (const json::exception &e) {
    throw emosid::ParseError("bad config file: " + std::string(e.what()));
  }

  auto unset = [&](const std::string &flag) { return cmd.count(flag) == 0; };

  if (config.contains("alpha") && unset("--alpha")) settings.alpha = config["alpha"].get<double>();
  if (config.contains("normalize") && unset("--no-normalize"))
    settings.normalize = config["normalize"].get<bool>();
  if (config.contains("seed") && unset("--seed"))
    settings.seed = config["seed"].get<std::uint64_t>();
  if (config.contains("threads") && unset("--threads"))
    settings.threads = config["threads"].get<int>();
  if (config.contains("ablations") && unset("--ablations"))
    settings.ablations = config["ablations"].get<bool>();

  if (config.contains("training")) {
    const json &t = config["training"];
    if (t.contains("max_iterations") && unset("--max-iterations"))
      settings.training.max_iterations = t["max_iterations"].get<int>();
    if (t.contains("rel_ll_tolerance") && unset("--tolerance"))
      settings.training.rel_ll_tolerance = t["rel_ll_tolerance"].get<double>();
    if (t.contains("n_mixtures") && unset("--mixtures"))
      settings.training.n_mixtures = t["n_mixtures"].get<int>();
    if (t.contains("variance_floor_scale") && unset("--variance-floor-scale"))
      settings.training.variance_floor_scale = t["variance_floor_scale"].get<double>();
  }

  if (config.contains("synth")) {
    const json &s = config["synth"];
    if (s.contains("preset") && unset("--preset")) settings.preset = s["preset"].get<std::string>();
    if (s.contains("speakers_per_gender") && unset("--speakers"))
      settings.synth.dims.speakers_per_gender = s["speakers_per_gender"].get<int>();
    if (s.contains("emotions") && unset("--emotions"))
      settings.synth.dims.emotions = s["emotions"].get<int>();
    if (s.contains("sentences") && unset("--sentences"))
      settings.synth.dims.sentences = s["sentences"].get<int>();
    if (s.contains("repetitions") && unset("--reps"))
      settings.synth.dims.repetitions = s["repetitions"].get<int>();
    if (s.contains("male_pitch_lo")) settings.synth.male_pitch.lo = s["male_pitch_lo"].get<double>();
    if (s.contains("male_pitch_hi")) settings.synth.male_pitch.hi = s["male_pitch_hi"].get<double>();
    if (s.contains("female_pitch_lo"))
      settings.synth.female_pitch.lo = s["female_pitch_lo"].get<double>();
    if (s.contains("female_pitch_hi"))
      settings.synth.female_pitch.hi = s["female_pitch_hi"].get<double>();
    if (s.contains("speaker_formant_spread"))
      settings.synth.speaker_formant_spread = s["speaker_formant_spread"].get<double>();
    if (s.contains("speaker_pitch_spread"))
      settings.synth.speaker_pitch_spread = s["speaker_pitch_spread"].get<double>();
    if (s.contains("duration_lo_s")) settings.synth.duration_lo_s = s["duration_lo_s"].get<double>();
    if (s.contains("duration_hi_s")) settings.synth.duration_hi_s = s["duration_hi_s"].get<double>();
    if (s.contains("emotion_modulations")) {
      settings.synth.emotions.clear();
      for (const json &e : s["emotion_modulations"])
        settings.synth.emotions.push_back({e.at("pitch_shift").get<double>(),
                                           e.at("pitch_variability").get<double>(),
                                           e.at("energy_shift_db").get<double>(),
                                           e.at("rate").get<double>()});
    }
  }
}

std::uint64_t hash_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw emosid::IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return emosid::fnv1a(bytes);
}

std::string alpha_tag(double alpha) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "alpha%.2f", alpha);
  return buf;
}

void print_stage(const emosid::StageScores &stage, const emosid::ModelRegistry &registry) {
  std::cout << "stage " << stage.stage << ":\n";
  for (const auto &candidate : stage.candidates)
    std::cout << "  " << emosid::label_to_string(candidate.label, registry) << "  "
              << candidate.score << '\n';
}

int run_synth(Settings &settings, const std::string &out_dir) {
  emosid::SynthSpec spec = settings.synth;
  spec.rng_seed = settings.seed;
  const emosid::CorpusManifest manifest = emosid::synthesize_corpus(spec, out_dir,
                                                                    settings.threads);
  std::cerr << "wrote " << (fs::path(out_dir) / "manifest.csv") << '\n';
  std::cout << manifest.records.size() << " records\n";
  return kExitOk;
}

int run_train(Settings &settings, const std::string &manifest_path,
              const std::string &registry_dir) {
  const emosid::CorpusManifest manifest = emosid::load_manifest(manifest_path);
  emosid::RegistryConfig config;
  config.training = settings.training;
  config.training.rng_seed = settings.seed;
  config.train_ablations = settings.ablations;
  config.threads = settings.threads;

  std::cerr << "training on " << manifest.records.size() << " records ("
            << manifest.dims.speakers_per_gender << " speakers/gender, "
            << manifest.dims.emotions << " emotions)\n";
  const emosid::ModelRegistry registry = emosid::train_registry(manifest, config);
  emosid::save_registry(registry, registry_dir);

  json info;
  info["manifest"] = manifest_path;
  std::ostringstream hash_hex;
  hash_hex << std::hex << hash_file(manifest_path);
  info["manifest_hash"] = hash_hex.str();
  info["seed"] = settings.seed;
  std::ofstream out(fs::path(registry_dir) / "train_info.json");
  out << info.dump(2) << '\n';

  std::cout << "gender models: " << registry.gender_model_count() << '\n'
            << "emotion models: " << registry.emotion_model_count() << '\n'
            << "speaker models: " << registry.speaker_model_count() << '\n'
            << "one-stage models: " << registry.one_stage_count() << '\n';
  return kExitOk;
}

int run_identify(Settings &settings, const std::string &registry_dir,
                 const std::string &wav_path, const std::string &approach_name) {
  const emosid::ModelRegistry registry = emosid::load_registry(registry_dir);
  const emosid::AnalyzedUtterance utterance =
      emosid::analyze_utterance(emosid::ingest_wav(wav_path));

  const emosid::Approach approach = emosid::approach_from_name(approach_name);
  emosid::IdentificationResult result;
  const emosid::Alpha alpha(settings.alpha);
  switch (approach) {
    case emosid::Approach::OneStage:
      result = emosid::identify_one_stage(registry, utterance.features, utterance.prosody,
                                          alpha, settings.normalize);
      break;
    case emosid::Approach::ThreeStage:
      result = emosid::identify_three_stage(registry, utterance.features, utterance.prosody,
                                            alpha, settings.normalize);
      break;
    default:
      result = emosid::identify_ablation(registry, approach, utterance.features,
                                         utterance.prosody, alpha, settings.normalize);
      break;
  }

  std::cout << "predicted: " << emosid::label_to_string(result.predicted, registry) << '\n';
  for (const auto &stage : result.stages) print_stage(stage, registry);
  return kExitOk;
}

int run_evaluate(Settings &settings, const std::string &registry_dir,
                 const std::string &manifest_path, const std::string &report_dir,
                 const std::string &approach_name, const std::string &ablation,
                 bool worst_case) {
  const emosid::ModelRegistry registry = emosid::load_registry(registry_dir);
  const emosid::CorpusManifest manifest = emosid::load_manifest(manifest_path);
  fs::create_directories(report_dir);

  emosid::EvalOptions options;
  options.alpha = settings.alpha;
  options.normalize = settings.normalize;
  options.threads = settings.threads;
  options.worst_case = worst_case;
  std::string tag;
  if (!ablation.empty()) {
    options.approach = emosid::approach_from_name(ablation);
    tag = ablation;
  } else {
    options.approach = emosid::approach_from_name(approach_name);
    tag = approach_name;
  }
  if (worst_case) {
    options.approach = emosid::Approach::ThreeStage;
    tag = "worst_case";
  }

  std::cerr << "evaluating " << tag << " at " << alpha_tag(settings.alpha) << '\n';
  const auto results =
      emosid::evaluate_split(registry, manifest, emosid::Split::Test, options);

  const auto match = worst_case ? emosid::SpeakerMatch::IdOnly
                                : emosid::SpeakerMatch::GenderAndId;
  const emosid::PerformanceTable table =
      emosid::performance_table(results, registry.emotion_names, match);

  const std::string suffix = tag + "_" + alpha_tag(settings.alpha);
  emosid::write_performance_csv(table,
                                fs::path(report_dir) / ("performance_" + suffix + ".csv"));

  const bool has_emotion_predictions = options.approach == emosid::Approach::OneStage ||
                                       options.approach == emosid::Approach::ThreeStage ||
                                       options.approach == emosid::Approach::Exp2;
  if (!worst_case) {
    emosid::write_confusion_csv(
        emosid::confusion_matrix(results, emosid::ConfusionStage::Gender,
                                 registry.emotion_names),
        fs::path(report_dir) / ("confusion_gender_" + suffix + ".csv"));
    if (has_emotion_predictions)
      for (emosid::Gender gender : emosid::kGenders)
        emosid::write_confusion_csv(
            emosid::confusion_matrix(results, emosid::ConfusionStage::Emotion,
                                     registry.emotion_names, gender),
            fs::path(report_dir) / (std::string("confusion_emotion_") +
                                    emosid::gender_to_char(gender) + "_" + suffix + ".csv"));
  }

  std::cout << emosid::format_performance_table(table);
  return kExitOk;
}

int run_sweep(Settings &settings, const std::string &registry_dir,
              const std::string &manifest_path, const std::string &report_dir) {
  const emosid::ModelRegistry registry = emosid::load_registry(registry_dir);
  const emosid::CorpusManifest manifest = emosid::load_manifest(manifest_path);
  fs::create_directories(report_dir);

  emosid::EvalOptions options;
  options.normalize = settings.normalize;
  options.threads = settings.threads;
  const auto grid = emosid::default_alpha_grid();
  std::cerr << "sweeping " << grid.size() << " alpha points\n";
  const emosid::AlphaSweep sweep = emosid::alpha_sweep(registry, manifest, grid, options);
  const fs::path out = fs::path(report_dir) / "sweep_three-stage.csv";
  emosid::write_sweep_csv(sweep, registry.emotion_names, out);
  std::cout << "wrote " << out.string() << '\n';
  return kExitOk;
}

int run_ttest(const std::string &report1, const std::string &report2,
              const std::string &method_name, const std::string &out_path) {
  const emosid::PerformanceTable table1 = emosid::read_performance_csv(report1);
  const emosid::PerformanceTable table2 = emosid::read_performance_csv(report2);
  const emosid::TableSummary s1 = emosid::table_summary(table1);
  const emosid::TableSummary s2 = emosid::table_summary(table2);
  const auto method = method_name == "pooled" ? emosid::TTestMethod::Pooled
                                              : emosid::TTestMethod::Welch;
  const emosid::TTestResult result =
      emosid::students_t(s1.mean, s1.sd, s1.n, s2.mean, s2.sd, s2.n, method);

  std::cout << "summary1: mean " << s1.mean << " sd " << s1.sd << " n " << s1.n << '\n'
            << "summary2: mean " << s2.mean << " sd " << s2.sd << " n " << s2.n << '\n'
            << "t = " << result.t_value << " (critical 0.05 one-sided: "
            << result.critical_value_0_05 << ", "
            << (result.t_value > result.critical_value_0_05 ? "significant" : "not significant")
            << ")\n";
  if (!out_path.empty()) emosid::write_ttest_report(result, out_path);
  return kExitOk;
}

void add_common(CLI::App *cmd, Settings &settings) {
  cmd->add_option("--config", settings.config_path, "JSON config file");
  cmd->add_option("--seed", settings.seed, "master RNG seed");
  cmd->add_option("--threads", settings.threads, "worker threads");
}

void add_scoring(CLI::App *cmd, Settings &settings) {
  cmd->add_option("--alpha", settings.alpha, "score fusion weight in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_flag_callback(
      "--no-normalize", [&settings] { settings.normalize = false; },
      "fuse raw log scores without per-observation length normalization");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Speaker identification toolkit for emotional speech"};
  app.require_subcommand(1);

  Settings settings;

  auto *synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string out_dir;
  synth->add_option("--out", out_dir, "output corpus directory")->required();
  synth->add_option("--preset", settings.preset,
                    "csd-shape, desk, separable or prosody-only");
  synth->add_option("--speakers", settings.synth.dims.speakers_per_gender,
                    "speakers per gender");
  synth->add_option("--emotions", settings.synth.dims.emotions, "emotion count");
  synth->add_option("--sentences", settings.synth.dims.sentences, "sentences per speaker");
  synth->add_option("--reps", settings.synth.dims.repetitions, "repetitions per sentence");
  add_common(synth, settings);

  auto *train = app.add_subcommand("train", "train a model registry");
  std::string manifest_path, registry_dir;
  train->add_option("--manifest", manifest_path, "corpus manifest")->required();
  train->add_option("--registry", registry_dir, "output registry directory")->required();
  train->add_flag("--ablations", settings.ablations, "also train the ablation model sets");
  train->add_option("--max-iterations", settings.training.max_iterations, "EM iteration cap");
  train->add_option("--tolerance", settings.training.rel_ll_tolerance,
                    "relative log-likelihood stop tolerance");
  train->add_option("--mixtures", settings.training.n_mixtures, "Gaussians per state");
  train->add_option("--variance-floor-scale", settings.training.variance_floor_scale,
                    "variance floor as a fraction of the global variance");
  add_common(train, settings);

  auto *identify = app.add_subcommand("identify", "identify one utterance");
  std::string wav_path, approach = "three-stage";
  identify->add_option("--registry", registry_dir, "trained registry directory")->required();
  identify->add_option("wav", wav_path, "utterance WAV file")->required();
  identify->add_option("--approach", approach, "one-stage or three-stage")
      ->check(CLI::IsMember({"one-stage", "three-stage"}));
  add_scoring(identify, settings);
  add_common(identify, settings);

  auto *evaluate = app.add_subcommand("evaluate", "evaluate the test split");
  std::string report_dir = "reports", ablation;
  bool worst_case = false;
  evaluate->add_option("--registry", registry_dir, "trained registry directory")->required();
  evaluate->add_option("--manifest", manifest_path, "corpus manifest")->required();
  evaluate->add_option("--report", report_dir, "report output directory");
  evaluate->add_option("--approach", approach, "one-stage or three-stage")
      ->check(CLI::IsMember({"one-stage", "three-stage"}));
  evaluate->add_option("--ablation", ablation, "exp1, exp2 or exp3")
      ->check(CLI::IsMember({"exp1", "exp2", "exp3"}));
  evaluate->add_flag("--worst-case", worst_case,
                     "force false gender and emotion into the cascade");
  add_scoring(evaluate, settings);
  add_common(evaluate, settings);

  auto *sweep = app.add_subcommand("sweep", "alpha sweep over the test split");
  sweep->add_option("--registry", registry_dir, "trained registry directory")->required();
  sweep->add_option("--manifest", manifest_path, "corpus manifest")->required();
  sweep->add_option("--report", report_dir, "report output directory");
  sweep->add_flag_callback(
      "--no-normalize", [&settings] { settings.normalize = false; },
      "fuse raw log scores");
  add_common(sweep, settings);

  auto *ttest = app.add_subcommand("ttest", "compare two performance reports");
  std::string report1, report2, method = "welch", ttest_out;
  ttest->add_option("report1", report1, "baseline performance CSV")->required();
  ttest->add_option("report2", report2, "comparison performance CSV")->required();
  ttest->add_option("--method", method, "welch or pooled")
      ->check(CLI::IsMember({"welch", "pooled"}));
  ttest->add_option("--report", ttest_out, "also write the result to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App *active = app.get_subcommands().front();
    apply_config_file(settings, *active);
    if (active == synth) {
      // The preset supplies everything; explicit dimension flags then override.
      emosid::SynthSpec spec = emosid::spec_for_preset(settings.preset);
      if (synth->count("--speakers") || settings.synth.dims.speakers_per_gender !=
                                            emosid::separable_spec().dims.speakers_per_gender)
        spec.dims.speakers_per_gender = settings.synth.dims.speakers_per_gender;
      if (synth->count("--emotions") ||
          settings.synth.dims.emotions != emosid::separable_spec().dims.emotions)
        spec.dims.emotions = settings.synth.dims.emotions;
      if (synth->count("--sentences") ||
          settings.synth.dims.sentences != emosid::separable_spec().dims.sentences)
        spec.dims.sentences = settings.synth.dims.sentences;
      if (synth->count("--reps") ||
          settings.synth.dims.repetitions != emosid::separable_spec().dims.repetitions)
        spec.dims.repetitions = settings.synth.dims.repetitions;
      spec.emotions = emosid::default_emotion_modulations(spec.dims.emotions);
      spec.male_pitch = settings.synth.male_pitch;
      spec.female_pitch = settings.synth.female_pitch;
      settings.synth = spec;
    }

    if (synth->parsed()) return run_synth(settings, out_dir);
    if (train->parsed()) return run_train(settings, manifest_path, registry_dir);
    if (identify->parsed()) return run_identify(settings, registry_dir, wav_path, approach);
    if (evaluate->parsed())
      return run_evaluate(settings, registry_dir, manifest_path, report_dir, approach,
                          ablation, worst_case);
    if (sweep->parsed()) return run_sweep(settings, registry_dir, manifest_path, report_dir);
    if (ttest->parsed()) return run_ttest(report1, report2, method, ttest_out);
  } catch (const emosid::IoError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const emosid::ParseError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const emosid::UnsupportedFormat &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const emosid::InsufficientData &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const emosid::MissingCell &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const emosid::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
