#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "emosid/features.hpp"
#include "emosid/gmm.hpp"

namespace emosid {

inline constexpr double kTransitionFloor = 1e-6;
inline constexpr double kVarianceFloorMin = 1e-10;

struct TrainingConfig {
  int max_iterations = 50;
  double rel_ll_tolerance = 1e-5;
  int n_mixtures = 3;
  double variance_floor_scale = 1e-3;  // times the global per-dim variance
  std::uint64_t rng_seed = 1;
};

/// Ergodic continuous-density HMM with Gaussian-mixture emissions. Every
/// transition stays strictly positive so each state remains reachable from
/// every other in one step.
struct GmmHmm {
  int n_states = 0;
  int feature_dim = 0;
  std::vector<double> initial_probs;             // N, sums to 1
  std::vector<std::vector<double>> transitions;  // N x N, rows sum to 1, entries > 0
  std::vector<GaussianMixture> emissions;        // N
  std::vector<double> variance_floor;            // per-dim floor applied in training
};

void validate_hmm(const GmmHmm &model);

/// log P(obs | model) summed over all state paths, in the log domain.
double log_forward(const GmmHmm &model, const FeatureMatrix &obs);

struct ViterbiResult {
  std::vector<int> path;
  double log_prob;
};

/// Maximum-probability state path; its log probability never exceeds the
/// forward score.
ViterbiResult viterbi(const GmmHmm &model, const FeatureMatrix &obs);

/// Seeded k-means initialization over the pooled frames: n_states * K cluster
/// means, variances from cluster scatter (floored), uniform-with-jitter
/// transitions, uniform initial probabilities. Deterministic per seed.
GmmHmm init_model(std::span<const FeatureMatrix> obs_set, int n_states,
                  const TrainingConfig &config);

struct BaumWelchResult {
  GmmHmm model;
  std::vector<double> iteration_log_likelihoods;
};

/// EM re-estimation with mixture-component responsibilities. Per-iteration
/// total log-likelihood is non-decreasing up to floor-induced dips below
/// 1e-8 relative.
BaumWelchResult baum_welch(const GmmHmm &initial, std::span<const FeatureMatrix> obs_set,
                           const TrainingConfig &config);

/// init_model followed by baum_welch.
GmmHmm train_hmm(std::span<const FeatureMatrix> obs_set, int n_states,
                 const TrainingConfig &config);

// Versioned text serialization; numbers are written in shortest round-trip
// form so reloaded models score bit-identically.
void save_hmm(const GmmHmm &model, std::ostream &out);
GmmHmm load_hmm(std::istream &in);
void save_hmm(const GmmHmm &model, const std::filesystem::path &path);
GmmHmm load_hmm(const std::filesystem::path &path);

}  // namespace emosid
