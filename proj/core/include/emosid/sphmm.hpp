#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>

#include "emosid/hmm.hpp"
#include "emosid/prosody.hpp"

namespace emosid {

inline constexpr int kAcousticStates = 9;
inline constexpr int kSuprasegmentalStates = 3;

/// Score-fusion weight: 0 is acoustic-only, 1 is prosodic-only.
class Alpha {
 public:
  Alpha() = default;
  explicit Alpha(double value);
  double value() const { return value_; }

 private:
  double value_ = 0.5;
};

/// An acoustic 9-state model paired with a 3-state prosodic model; each
/// consecutive triple of acoustic states maps onto one suprasegmental state.
struct Sphmm {
  GmmHmm acoustic;         // 9 states over the 16-dim MFCC space
  GmmHmm suprasegmental;   // 3 states over the prosodic-vector space
  std::array<int, kAcousticStates> grouping = {0, 0, 0, 1, 1, 1, 2, 2, 2};
};

void validate_sphmm(const Sphmm &model);

/// MFCC and prosodic observations of one utterance, the unit every model
/// trains on and every recognizer scores.
struct AnalyzedUtterance {
  FeatureSequence features;
  SuprasegmentalSequence prosody;
};

/// Trains the acoustic model on the MFCC sequences first, then the
/// suprasegmental model on the paired prosodic sequences.
Sphmm train_sphmm(std::span<const AnalyzedUtterance> utterances,
                  const TrainingConfig &config);

/// The weighted log-score combination: (1 - alpha) * acoustic + alpha * prosodic.
double fuse_scores(double acoustic_log_prob, double suprasegmental_log_prob, Alpha alpha);

/// Fused score of an utterance. With normalize set (the default), each
/// sub-score is divided by its own observation count before fusion so the
/// ~hundreds of acoustic frames cannot drown the 3 prosodic segments.
double combined_log_prob(const Sphmm &model, const FeatureSequence &acoustic_obs,
                         const SuprasegmentalSequence &pros_obs, Alpha alpha,
                         bool normalize = true);

void save_sphmm(const Sphmm &model, std::ostream &out);
Sphmm load_sphmm(std::istream &in);
void save_sphmm(const Sphmm &model, const std::filesystem::path &path);
Sphmm load_sphmm(const std::filesystem::path &path);

}  // namespace emosid
