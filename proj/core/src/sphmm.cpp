#include "emosid/sphmm.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "emosid/errors.hpp"

namespace emosid {

namespace {

constexpr const char *kMagic = "EMOSID_SPHMM";
constexpr int kFormatVersion = 1;

}  // namespace

Alpha::Alpha(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0))
    throw InvariantViolation("alpha must lie in [0, 1], got " + std::to_string(value));
}

void validate_sphmm(const Sphmm &model) {
  if (model.acoustic.n_states != kAcousticStates)
    throw InvariantViolation("acoustic model must have 9 states");
  if (model.suprasegmental.n_states != kSuprasegmentalStates)
    throw InvariantViolation("suprasegmental model must have 3 states");
  std::array<int, kSuprasegmentalStates> counts{};
  for (int g : model.grouping) {
    if (g < 0 || g >= kSuprasegmentalStates)
      throw InvariantViolation("grouping target out of range");
    counts[static_cast<std::size_t>(g)]++;
  }
  for (int c : counts)
    if (c != kAcousticStates / kSuprasegmentalStates)
      throw InvariantViolation("grouping must map three acoustic states per suprasegmental state");
  validate_hmm(model.acoustic);
  validate_hmm(model.suprasegmental);
}

Sphmm train_sphmm(std::span<const AnalyzedUtterance> utterances,
                  const TrainingConfig &config) {
  if (utterances.empty()) throw InsufficientData("empty SPHMM training set");

  std::vector<FeatureMatrix> acoustic_obs, prosodic_obs;
  acoustic_obs.reserve(utterances.size());
  prosodic_obs.reserve(utterances.size());
  for (const auto &utterance : utterances) {
    acoustic_obs.push_back(utterance.features);
    prosodic_obs.push_back(utterance.prosody.to_matrix());
  }

  Sphmm model;
  model.acoustic = train_hmm(acoustic_obs, kAcousticStates, config);
  model.suprasegmental = train_hmm(prosodic_obs, kSuprasegmentalStates, config);
  return model;
}

double fuse_scores(double acoustic_log_prob, double suprasegmental_log_prob, Alpha alpha) {
  const double a = alpha.value();
  if (a == 0.0) return acoustic_log_prob;
  if (a == 1.0) return suprasegmental_log_prob;
  return (1.0 - a) * acoustic_log_prob + a * suprasegmental_log_prob;
}

double combined_log_prob(const Sphmm &model, const FeatureSequence &acoustic_obs,
                         const SuprasegmentalSequence &pros_obs, Alpha alpha,
                         bool normalize) {
  const double a = alpha.value();
  double acoustic_score = 0.0;
  double suprasegmental_score = 0.0;
  if (a < 1.0) {
    acoustic_score = log_forward(model.acoustic, acoustic_obs);
    if (normalize) acoustic_score /= static_cast<double>(acoustic_obs.rows());
  }
  if (a > 0.0) {
    const FeatureMatrix pros_matrix = pros_obs.to_matrix();
    suprasegmental_score = log_forward(model.suprasegmental, pros_matrix);
    if (normalize) suprasegmental_score /= static_cast<double>(pros_matrix.rows());
  }
  return fuse_scores(acoustic_score, suprasegmental_score, alpha);
}

void save_sphmm(const Sphmm &model, std::ostream &out) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "grouping";
  for (int g : model.grouping) out << ' ' << g;
  out << '\n';
  save_hmm(model.acoustic, out);
  save_hmm(model.suprasegmental, out);
}

Sphmm load_sphmm(std::istream &in) {
  std::string token;
  if (!(in >> token) || token != kMagic) throw ParseError("not an SPHMM file");
  int version = 0;
  if (!(in >> version) || version != kFormatVersion)
    throw UnsupportedFormat("SPHMM format version " + std::to_string(version));
  if (!(in >> token) || token != "grouping") throw ParseError("missing grouping");
  Sphmm model;
  for (int &g : model.grouping)
    if (!(in >> g)) throw ParseError("truncated grouping");
  model.acoustic = load_hmm(in);
  model.suprasegmental = load_hmm(in);
  validate_sphmm(model);
  return model;
}

void save_sphmm(const Sphmm &model, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save_sphmm(model, out);
}

Sphmm load_sphmm(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_sphmm(in);
}

}  // namespace emosid
