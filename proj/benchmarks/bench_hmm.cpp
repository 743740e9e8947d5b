#include <benchmark/benchmark.h>

#include <random>

#include "emosid/hmm.hpp"
#include "emosid/sphmm.hpp"

namespace {

// Utterance-scale scoring: 9 states, 3 mixtures, 141 frames of 16 dims.
emosid::GmmHmm utterance_scale_model(std::mt19937_64 &rng, int n_states, int dim,
                                     int n_mixtures) {
  std::uniform_real_distribution<double> positive(0.1, 1.0), mean(-2.0, 2.0), var(0.3, 2.0);
  emosid::GmmHmm model;
  model.n_states = n_states;
  model.feature_dim = dim;
  model.variance_floor.assign(static_cast<std::size_t>(dim), 1e-10);
  const auto n = static_cast<std::size_t>(n_states);
  model.initial_probs.assign(n, 1.0 / static_cast<double>(n));
  model.transitions.assign(n, std::vector<double>(n, 1.0 / static_cast<double>(n)));
  model.emissions.resize(n);
  for (auto &mixture : model.emissions) {
    const auto k = static_cast<std::size_t>(n_mixtures);
    mixture.weights.assign(k, 1.0 / static_cast<double>(k));
    mixture.means.assign(k, std::vector<double>(static_cast<std::size_t>(dim)));
    mixture.variances.assign(k, std::vector<double>(static_cast<std::size_t>(dim)));
    for (std::size_t c = 0; c < k; ++c)
      for (int d = 0; d < dim; ++d) {
        mixture.means[c][static_cast<std::size_t>(d)] = mean(rng);
        mixture.variances[c][static_cast<std::size_t>(d)] = var(rng);
      }
  }
  return model;
}

emosid::FeatureMatrix observations(std::mt19937_64 &rng, std::size_t t_len, int dim) {
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  emosid::FeatureMatrix obs(static_cast<std::size_t>(dim));
  std::vector<double> row(static_cast<std::size_t>(dim));
  for (std::size_t t = 0; t < t_len; ++t) {
    for (double &v : row) v = value(rng);
    obs.push_row(row);
  }
  return obs;
}

void BM_log_forward(benchmark::State &state) {
  std::mt19937_64 rng(1);
  const emosid::GmmHmm model = utterance_scale_model(rng, 9, 16, 3);
  const emosid::FeatureMatrix obs = observations(rng, 141, 16);
  for (auto _ : state) benchmark::DoNotOptimize(emosid::log_forward(model, obs));
}
BENCHMARK(BM_log_forward)->Unit(benchmark::kMicrosecond);

void BM_viterbi(benchmark::State &state) {
  std::mt19937_64 rng(2);
  const emosid::GmmHmm model = utterance_scale_model(rng, 9, 16, 3);
  const emosid::FeatureMatrix obs = observations(rng, 141, 16);
  for (auto _ : state) benchmark::DoNotOptimize(emosid::viterbi(model, obs));
}
BENCHMARK(BM_viterbi)->Unit(benchmark::kMicrosecond);

void BM_baum_welch_iteration(benchmark::State &state) {
  std::mt19937_64 rng(3);
  std::vector<emosid::FeatureMatrix> obs_set;
  for (int i = 0; i < 10; ++i) obs_set.push_back(observations(rng, 141, 16));
  emosid::TrainingConfig config;
  config.max_iterations = 1;
  config.n_mixtures = 3;
  const emosid::GmmHmm start = emosid::init_model(obs_set, 9, config);
  for (auto _ : state)
    benchmark::DoNotOptimize(emosid::baum_welch(start, obs_set, config));
}
BENCHMARK(BM_baum_welch_iteration)->Unit(benchmark::kMillisecond);

}  // namespace
