#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "emosid/features.hpp"
#include "emosid/hmm.hpp"

namespace emosid::test {

// Independent diagonal-Gaussian mixture density, deliberately not sharing
// any code with MixtureScorer.
inline double oracle_log_density(const GaussianMixture &mixture,
                                 std::span<const double> x) {
  double total = 0.0;
  for (std::size_t k = 0; k < mixture.components(); ++k) {
    double density = mixture.weights[k];
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double var = mixture.variances[k][d];
      const double diff = x[d] - mixture.means[k][d];
      density *= std::exp(-0.5 * diff * diff / var) /
                 std::sqrt(2.0 * std::numbers::pi * var);
    }
    total += density;
  }
  return std::log(total);
}

// Exhaustive sum over all n_states^T state paths. Only usable for tiny
// models; this is the ground truth the forward recursion is checked against.
inline double oracle_log_likelihood(const GmmHmm &model, const FeatureMatrix &obs) {
  const auto n = static_cast<std::size_t>(model.n_states);
  const std::size_t t_len = obs.rows();
  std::vector<std::size_t> path(t_len, 0);
  std::vector<double> path_logs;
  while (true) {
    double lp = std::log(model.initial_probs[path[0]]) +
                oracle_log_density(model.emissions[path[0]], obs.row(0));
    for (std::size_t t = 1; t < t_len; ++t)
      lp += std::log(model.transitions[path[t - 1]][path[t]]) +
            oracle_log_density(model.emissions[path[t]], obs.row(t));
    path_logs.push_back(lp);

    std::size_t pos = 0;
    while (pos < t_len && ++path[pos] == n) {
      path[pos] = 0;
      ++pos;
    }
    if (pos == t_len) break;
  }
  double hi = path_logs.front();
  for (double lp : path_logs) hi = std::max(hi, lp);
  double acc = 0.0;
  for (double lp : path_logs) acc += std::exp(lp - hi);
  return hi + std::log(acc);
}

// Best single path by enumeration, for checking Viterbi.
inline std::pair<std::vector<int>, double> oracle_best_path(const GmmHmm &model,
                                                            const FeatureMatrix &obs) {
  const auto n = static_cast<std::size_t>(model.n_states);
  const std::size_t t_len = obs.rows();
  std::vector<std::size_t> path(t_len, 0);
  std::vector<int> best_path(t_len, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    double lp = std::log(model.initial_probs[path[0]]) +
                oracle_log_density(model.emissions[path[0]], obs.row(0));
    for (std::size_t t = 1; t < t_len; ++t)
      lp += std::log(model.transitions[path[t - 1]][path[t]]) +
            oracle_log_density(model.emissions[path[t]], obs.row(t));
    if (lp > best) {
      best = lp;
      for (std::size_t t = 0; t < t_len; ++t) best_path[t] = static_cast<int>(path[t]);
    }
    std::size_t pos = 0;
    while (pos < t_len && ++path[pos] == n) {
      path[pos] = 0;
      ++pos;
    }
    if (pos == t_len) break;
  }
  return {best_path, best};
}

inline GmmHmm random_model(std::mt19937_64 &rng, int n_states, int dim, int n_mixtures) {
  std::uniform_real_distribution<double> positive(0.1, 1.0);
  std::uniform_real_distribution<double> mean_dist(-2.0, 2.0);
  std::uniform_real_distribution<double> var_dist(0.3, 2.0);

  GmmHmm model;
  model.n_states = n_states;
  model.feature_dim = dim;
  model.variance_floor.assign(static_cast<std::size_t>(dim), kVarianceFloorMin);

  const auto n = static_cast<std::size_t>(n_states);
  model.initial_probs.resize(n);
  double pi_sum = 0.0;
  for (double &p : model.initial_probs) pi_sum += (p = positive(rng));
  for (double &p : model.initial_probs) p /= pi_sum;

  model.transitions.assign(n, std::vector<double>(n));
  for (auto &row : model.transitions) {
    double row_sum = 0.0;
    for (double &a : row) row_sum += (a = positive(rng));
    for (double &a : row) a /= row_sum;
  }

  model.emissions.resize(n);
  for (auto &mixture : model.emissions) {
    const auto k_mix = static_cast<std::size_t>(n_mixtures);
    mixture.weights.resize(k_mix);
    double w_sum = 0.0;
    for (double &w : mixture.weights) w_sum += (w = positive(rng));
    for (double &w : mixture.weights) w /= w_sum;
    mixture.means.assign(k_mix, std::vector<double>(static_cast<std::size_t>(dim)));
    mixture.variances.assign(k_mix, std::vector<double>(static_cast<std::size_t>(dim)));
    for (std::size_t k = 0; k < k_mix; ++k)
      for (int d = 0; d < dim; ++d) {
        mixture.means[k][static_cast<std::size_t>(d)] = mean_dist(rng);
        mixture.variances[k][static_cast<std::size_t>(d)] = var_dist(rng);
      }
  }
  return model;
}

inline FeatureMatrix random_observations(std::mt19937_64 &rng, std::size_t t_len, int dim) {
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  FeatureMatrix obs(static_cast<std::size_t>(dim));
  std::vector<double> row(static_cast<std::size_t>(dim));
  for (std::size_t t = 0; t < t_len; ++t) {
    for (double &v : row) v = value(rng);
    obs.push_row(row);
  }
  return obs;
}

// Sampling from a model, for EM recovery tests.
inline FeatureMatrix sample_sequence(std::mt19937_64 &rng, const GmmHmm &model,
                                     std::size_t t_len) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto pick = [&](const std::vector<double> &probs) {
    double u = uniform(rng);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (u < probs[i]) return i;
      u -= probs[i];
    }
    return probs.size() - 1;
  };

  FeatureMatrix obs(static_cast<std::size_t>(model.feature_dim));
  std::vector<double> row(static_cast<std::size_t>(model.feature_dim));
  std::size_t state = pick(model.initial_probs);
  for (std::size_t t = 0; t < t_len; ++t) {
    const GaussianMixture &mixture = model.emissions[state];
    const std::size_t k = pick(mixture.weights);
    for (std::size_t d = 0; d < row.size(); ++d)
      row[d] = mixture.means[k][d] + std::sqrt(mixture.variances[k][d]) * normal(rng);
    obs.push_row(row);
    state = pick(model.transitions[state]);
  }
  return obs;
}

}  // namespace emosid::test
