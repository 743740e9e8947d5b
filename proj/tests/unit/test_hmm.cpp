#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "emosid/errors.hpp"
#include "emosid/hmm.hpp"
#include "helpers.hpp"

using namespace emosid;
using namespace emosid::test;

TEST_CASE("forward matches the exhaustive path sum") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> states(1, 3), dims(1, 4), comps(1, 3), frames(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const GmmHmm model = random_model(rng, states(rng), dims(rng), comps(rng));
    const FeatureMatrix obs =
        random_observations(rng, static_cast<std::size_t>(frames(rng)), model.feature_dim);
    const double expected = oracle_log_likelihood(model, obs);
    const double actual = log_forward(model, obs);
    CHECK(actual == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("single-state forward is the sum of frame densities") {
  std::mt19937_64 rng(103);
  const GmmHmm model = random_model(rng, 1, 3, 2);
  const FeatureMatrix obs = random_observations(rng, 10, 3);
  double expected = 0.0;
  for (std::size_t t = 0; t < obs.rows(); ++t)
    expected += oracle_log_density(model.emissions[0], obs.row(t));
  CHECK(log_forward(model, obs) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("appending a frame adds at most the best emission") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 50; ++trial) {
    const GmmHmm model = random_model(rng, 3, 2, 2);
    FeatureMatrix obs = random_observations(rng, 5, 2);
    const double shorter = log_forward(model, obs);

    const FeatureMatrix extra = random_observations(rng, 1, 2);
    double best_density = -std::numeric_limits<double>::infinity();
    for (const auto &mixture : model.emissions)
      best_density = std::max(best_density, oracle_log_density(mixture, extra.row(0)));
    obs.push_row(extra.row(0));
    CHECK(log_forward(model, obs) <= shorter + best_density + 1e-9);
  }
}

TEST_CASE("forward rejects bad observations") {
  std::mt19937_64 rng(109);
  const GmmHmm model = random_model(rng, 2, 3, 1);
  CHECK_THROWS_AS(log_forward(model, FeatureMatrix(3)), EmptyObservation);
  CHECK_THROWS_AS(log_forward(model, random_observations(rng, 4, 2)), DimensionMismatch);
}

TEST_CASE("viterbi matches the enumerated best path") {
  std::mt19937_64 rng(113);
  std::uniform_int_distribution<int> states(1, 3), frames(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const GmmHmm model = random_model(rng, states(rng), 2, 2);
    const FeatureMatrix obs =
        random_observations(rng, static_cast<std::size_t>(frames(rng)), 2);
    const auto [expected_path, expected_lp] = oracle_best_path(model, obs);
    const ViterbiResult actual = viterbi(model, obs);
    CHECK(actual.path == expected_path);
    CHECK(actual.log_prob == doctest::Approx(expected_lp).epsilon(1e-9));
  }
}

TEST_CASE("viterbi path probability never exceeds the forward score") {
  std::mt19937_64 rng(127);
  for (int trial = 0; trial < 100; ++trial) {
    const GmmHmm model = random_model(rng, 3, 2, 2);
    const FeatureMatrix obs = random_observations(rng, 8, 2);
    CHECK(viterbi(model, obs).log_prob <= log_forward(model, obs) + 1e-12);
  }
}

TEST_CASE("single-state viterbi path is all zeros") {
  std::mt19937_64 rng(131);
  const GmmHmm model = random_model(rng, 1, 2, 1);
  const FeatureMatrix obs = random_observations(rng, 6, 2);
  const ViterbiResult result = viterbi(model, obs);
  for (int state : result.path) CHECK(state == 0);
}

namespace {

std::string serialized(const GmmHmm &model) {
  std::ostringstream out;
  save_hmm(model, out);
  return out.str();
}

}  // namespace

TEST_CASE("init_model is deterministic per seed") {
  std::mt19937_64 rng(137);
  std::vector<FeatureMatrix> obs_set;
  for (int i = 0; i < 4; ++i) obs_set.push_back(random_observations(rng, 30, 3));
  TrainingConfig config;
  config.rng_seed = 99;
  const GmmHmm a = init_model(obs_set, 3, config);
  const GmmHmm b = init_model(obs_set, 3, config);
  CHECK(serialized(a) == serialized(b));
}

TEST_CASE("degenerate init is the global moments") {
  std::mt19937_64 rng(139);
  std::vector<FeatureMatrix> obs_set{random_observations(rng, 50, 2)};
  TrainingConfig config;
  config.n_mixtures = 1;
  const GmmHmm model = init_model(obs_set, 1, config);

  double mean0 = 0.0, mean1 = 0.0;
  for (std::size_t t = 0; t < 50; ++t) {
    mean0 += obs_set[0].row(t)[0];
    mean1 += obs_set[0].row(t)[1];
  }
  mean0 /= 50.0;
  mean1 /= 50.0;
  double var0 = 0.0, var1 = 0.0;
  for (std::size_t t = 0; t < 50; ++t) {
    var0 += (obs_set[0].row(t)[0] - mean0) * (obs_set[0].row(t)[0] - mean0);
    var1 += (obs_set[0].row(t)[1] - mean1) * (obs_set[0].row(t)[1] - mean1);
  }
  var0 /= 50.0;
  var1 /= 50.0;

  CHECK(model.emissions[0].means[0][0] == doctest::Approx(mean0).epsilon(1e-12));
  CHECK(model.emissions[0].means[0][1] == doctest::Approx(mean1).epsilon(1e-12));
  CHECK(model.emissions[0].variances[0][0] == doctest::Approx(var0).epsilon(1e-9));
  CHECK(model.emissions[0].variances[0][1] == doctest::Approx(var1).epsilon(1e-9));
}

TEST_CASE("init_model demands enough frames") {
  std::mt19937_64 rng(149);
  std::vector<FeatureMatrix> obs_set{random_observations(rng, 5, 2)};
  TrainingConfig config;
  config.n_mixtures = 3;
  CHECK_THROWS_AS(init_model(obs_set, 2, config), InsufficientData);
}

TEST_CASE("EM log-likelihood never decreases") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    const GmmHmm truth = random_model(rng, 2, 2, 1);
    std::vector<FeatureMatrix> obs_set;
    for (int i = 0; i < 8; ++i) obs_set.push_back(sample_sequence(rng, truth, 25));

    TrainingConfig config;
    config.max_iterations = 12;
    config.rel_ll_tolerance = 1e-12;
    config.n_mixtures = 2;
    config.rng_seed = seed;
    const GmmHmm start = init_model(obs_set, 2, config);
    const BaumWelchResult result = baum_welch(start, obs_set, config);
    REQUIRE(result.iteration_log_likelihoods.size() >= 2);
    for (std::size_t i = 1; i < result.iteration_log_likelihoods.size(); ++i) {
      const double prev = result.iteration_log_likelihoods[i - 1];
      const double cur = result.iteration_log_likelihoods[i];
      CHECK(cur >= prev - 1e-8 * std::abs(prev));
    }
    CHECK_NOTHROW(validate_hmm(result.model));
  }
}

TEST_CASE("one EM step from the generating model does not decrease") {
  std::mt19937_64 rng(151);
  const GmmHmm truth = random_model(rng, 2, 2, 2);
  std::vector<FeatureMatrix> obs_set;
  for (int i = 0; i < 10; ++i) obs_set.push_back(sample_sequence(rng, truth, 20));
  TrainingConfig config;
  config.max_iterations = 2;
  config.rel_ll_tolerance = 1e-15;
  const BaumWelchResult result = baum_welch(truth, obs_set, config);
  REQUIRE(result.iteration_log_likelihoods.size() == 2);
  const double first = result.iteration_log_likelihoods[0];
  const double second = result.iteration_log_likelihoods[1];
  CHECK(second >= first - 1e-8 * std::abs(first));
}

TEST_CASE("single-state single-component EM is the sample moments") {
  std::mt19937_64 rng(157);
  std::vector<FeatureMatrix> obs_set{random_observations(rng, 60, 2),
                                     random_observations(rng, 40, 2)};
  TrainingConfig config;
  config.max_iterations = 1;
  config.n_mixtures = 1;
  const GmmHmm start = init_model(obs_set, 1, config);
  const GmmHmm model = baum_welch(start, obs_set, config).model;

  double mean[2] = {0.0, 0.0};
  double sq[2] = {0.0, 0.0};
  std::size_t count = 0;
  for (const auto &obs : obs_set)
    for (std::size_t t = 0; t < obs.rows(); ++t) {
      for (int d = 0; d < 2; ++d) {
        mean[d] += obs.row(t)[static_cast<std::size_t>(d)];
        sq[d] += obs.row(t)[static_cast<std::size_t>(d)] *
                 obs.row(t)[static_cast<std::size_t>(d)];
      }
      ++count;
    }
  for (int d = 0; d < 2; ++d) {
    mean[d] /= static_cast<double>(count);
    const double var = sq[d] / static_cast<double>(count) - mean[d] * mean[d];
    CHECK(model.emissions[0].means[0][static_cast<std::size_t>(d)] ==
          doctest::Approx(mean[d]).epsilon(1e-9));
    CHECK(model.emissions[0].variances[0][static_cast<std::size_t>(d)] ==
          doctest::Approx(var).epsilon(1e-9));
  }
}

TEST_CASE("EM recovers a generating model to within 5% held-out likelihood") {
  std::mt19937_64 rng(163);
  const GmmHmm truth = random_model(rng, 2, 2, 1);
  std::vector<FeatureMatrix> train_set, heldout;
  for (int i = 0; i < 200; ++i) train_set.push_back(sample_sequence(rng, truth, 20));
  for (int i = 0; i < 40; ++i) heldout.push_back(sample_sequence(rng, truth, 20));

  TrainingConfig config;
  config.max_iterations = 40;
  config.n_mixtures = 1;
  config.rng_seed = 5;
  const GmmHmm learned = train_hmm(train_set, 2, config);

  double truth_ll = 0.0, learned_ll = 0.0;
  for (const auto &obs : heldout) {
    truth_ll += log_forward(truth, obs);
    learned_ll += log_forward(learned, obs);
  }
  CHECK(std::abs(learned_ll - truth_ll) <= 0.05 * std::abs(truth_ll));
}

TEST_CASE("trained transitions stay strictly positive") {
  std::mt19937_64 rng(167);
  std::vector<FeatureMatrix> obs_set;
  for (int i = 0; i < 5; ++i) obs_set.push_back(random_observations(rng, 30, 2));
  TrainingConfig config;
  config.max_iterations = 8;
  config.n_mixtures = 2;
  const GmmHmm model = train_hmm(obs_set, 3, config);
  for (const auto &row : model.transitions)
    for (double a : row) CHECK(a >= kTransitionFloor / 2.0);
}

TEST_CASE("serialization reproduces scores bit-identically") {
  std::mt19937_64 rng(173);
  std::vector<FeatureMatrix> obs_set{random_observations(rng, 40, 3)};
  TrainingConfig config;
  config.max_iterations = 5;
  config.n_mixtures = 2;
  const GmmHmm model = train_hmm(obs_set, 2, config);
  const FeatureMatrix probe = random_observations(rng, 12, 3);

  std::stringstream buffer;
  save_hmm(model, buffer);
  const GmmHmm reloaded = load_hmm(buffer);
  CHECK(log_forward(model, probe) == log_forward(reloaded, probe));
  CHECK(viterbi(model, probe).log_prob == viterbi(reloaded, probe).log_prob);
}

TEST_CASE("model loader rejects garbage") {
  std::stringstream bad("NOT_A_MODEL 1 whatever");
  CHECK_THROWS_AS(load_hmm(bad), ParseError);
}
