#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "emosid/errors.hpp"
#include "emosid/sphmm.hpp"
#include "helpers.hpp"

using namespace emosid;
using namespace emosid::test;

namespace {

Sphmm make_sphmm(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Sphmm model;
  model.acoustic = random_model(rng, kAcousticStates, 16, 1);
  model.suprasegmental = random_model(rng, kSuprasegmentalStates, kProsodyDim, 1);
  return model;
}

SuprasegmentalSequence make_prosody(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  SuprasegmentalSequence seq;
  for (int s = 0; s < 3; ++s) {
    ProsodicVector v;
    v.pitch_mean_hz = 150.0 + 40.0 * value(rng);
    v.pitch_slope_hz_per_s = 20.0 * value(rng);
    v.pitch_range_hz = 10.0 + 5.0 * value(rng);
    v.energy_mean_db = -20.0 + 5.0 * value(rng);
    v.energy_range_db = 6.0 + value(rng);
    v.voiced_fraction = 0.5 + 0.4 * value(rng);
    v.log_duration = -1.0 + 0.2 * value(rng);
    seq.segments.push_back(v);
  }
  return seq;
}

std::string serialized(const Sphmm &model) {
  std::ostringstream out;
  save_sphmm(model, out);
  return out.str();
}

}  // namespace

TEST_CASE("alpha validates its range") {
  CHECK_NOTHROW(Alpha(0.0));
  CHECK_NOTHROW(Alpha(1.0));
  CHECK_THROWS_AS(Alpha(-0.01), InvariantViolation);
  CHECK_THROWS_AS(Alpha(1.01), InvariantViolation);
}

TEST_CASE("fuse_scores arithmetic") {
  CHECK(fuse_scores(-100.0, -80.0, Alpha(0.5)) == doctest::Approx(-90.0).epsilon(1e-12));
  CHECK(fuse_scores(-100.0, -80.0, Alpha(0.0)) == -100.0);
  CHECK(fuse_scores(-100.0, -80.0, Alpha(1.0)) == -80.0);
}

TEST_CASE("alpha endpoints are exact for both normalize settings") {
  std::mt19937_64 rng(211);
  const Sphmm model = make_sphmm(7);
  const FeatureMatrix features = random_observations(rng, 20, 16);
  const SuprasegmentalSequence prosody = make_prosody(3);

  for (bool normalize : {false, true}) {
    const double acoustic = log_forward(model.acoustic, features) /
                            (normalize ? static_cast<double>(features.rows()) : 1.0);
    const double supra = log_forward(model.suprasegmental, prosody.to_matrix()) /
                         (normalize ? 3.0 : 1.0);
    CHECK(combined_log_prob(model, features, prosody, Alpha(0.0), normalize) == acoustic);
    CHECK(combined_log_prob(model, features, prosody, Alpha(1.0), normalize) == supra);
  }
}

TEST_CASE("fusion is affine in alpha") {
  std::mt19937_64 rng(223);
  const Sphmm model = make_sphmm(11);
  const FeatureMatrix features = random_observations(rng, 15, 16);
  const SuprasegmentalSequence prosody = make_prosody(5);

  const double at0 = combined_log_prob(model, features, prosody, Alpha(0.0));
  const double at1 = combined_log_prob(model, features, prosody, Alpha(1.0));
  for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const double interpolated = (1.0 - alpha) * at0 + alpha * at1;
    const double actual = combined_log_prob(model, features, prosody, Alpha(alpha));
    CHECK(std::abs(actual - interpolated) <=
          1e-12 * std::max(1.0, std::abs(interpolated)));
  }
}

TEST_CASE("normalization keeps duplicated utterances length-stable") {
  std::mt19937_64 rng(227);
  const Sphmm model = make_sphmm(13);
  const FeatureMatrix features = random_observations(rng, 18, 16);
  const SuprasegmentalSequence prosody = make_prosody(17);

  FeatureMatrix doubled(16);
  for (int rep = 0; rep < 2; ++rep)
    for (std::size_t t = 0; t < features.rows(); ++t) doubled.push_row(features.row(t));
  SuprasegmentalSequence doubled_prosody = prosody;
  doubled_prosody.segments.insert(doubled_prosody.segments.end(), prosody.segments.begin(),
                                  prosody.segments.end());

  const double raw_once =
      combined_log_prob(model, features, prosody, Alpha(0.5), /*normalize=*/false);
  const double raw_twice =
      combined_log_prob(model, doubled, doubled_prosody, Alpha(0.5), /*normalize=*/false);
  CHECK(raw_twice / raw_once == doctest::Approx(2.0).epsilon(0.2));

  const double norm_once =
      combined_log_prob(model, features, prosody, Alpha(0.5), /*normalize=*/true);
  const double norm_twice =
      combined_log_prob(model, doubled, doubled_prosody, Alpha(0.5), /*normalize=*/true);
  CHECK(std::abs(norm_twice - norm_once) <= 0.05 * std::abs(norm_once));
}

namespace {

std::vector<AnalyzedUtterance> fake_training_set(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<AnalyzedUtterance> utterances;
  for (int i = 0; i < count; ++i) {
    AnalyzedUtterance u;
    u.features = random_observations(rng, 30, 16);
    u.prosody = make_prosody(seed + static_cast<std::uint64_t>(i));
    utterances.push_back(std::move(u));
  }
  return utterances;
}

}  // namespace

TEST_CASE("train_sphmm is deterministic per seed") {
  const auto utterances = fake_training_set(31, 4);
  TrainingConfig config;
  config.max_iterations = 4;
  config.n_mixtures = 1;
  config.rng_seed = 77;
  const Sphmm a = train_sphmm(utterances, config);
  const Sphmm b = train_sphmm(utterances, config);
  CHECK(serialized(a) == serialized(b));
}

TEST_CASE("identical utterances pin the prosodic emission means") {
  auto utterances = fake_training_set(37, 1);
  for (int i = 0; i < 5; ++i) utterances.push_back(utterances.front());

  TrainingConfig config;
  config.max_iterations = 3;
  config.n_mixtures = 1;
  const Sphmm model = train_sphmm(utterances, config);

  const FeatureMatrix segments = utterances.front().prosody.to_matrix();
  for (const auto &mixture : model.suprasegmental.emissions) {
    double best = 1e300;
    for (std::size_t s = 0; s < segments.rows(); ++s) {
      double dist = 0.0;
      for (std::size_t d = 0; d < kProsodyDim; ++d) {
        const double diff = mixture.means[0][d] - segments.row(s)[d];
        dist += diff * diff;
      }
      best = std::min(best, dist);
    }
    CHECK(best <= 1e-6);
  }
}

TEST_CASE("empty SPHMM training set is rejected") {
  TrainingConfig config;
  CHECK_THROWS_AS(train_sphmm({}, config), InsufficientData);
}

TEST_CASE("SPHMM serialization reproduces combined scores") {
  std::mt19937_64 rng(41);
  const auto utterances = fake_training_set(43, 3);
  TrainingConfig config;
  config.max_iterations = 3;
  config.n_mixtures = 1;
  const Sphmm model = train_sphmm(utterances, config);

  std::stringstream buffer;
  save_sphmm(model, buffer);
  const Sphmm reloaded = load_sphmm(buffer);

  const FeatureMatrix probe = random_observations(rng, 12, 16);
  const SuprasegmentalSequence prosody = make_prosody(47);
  CHECK(combined_log_prob(model, probe, prosody, Alpha(0.3)) ==
        combined_log_prob(reloaded, probe, prosody, Alpha(0.3)));
}

TEST_CASE("sphmm validation enforces the topology") {
  Sphmm model = make_sphmm(53);
  CHECK_NOTHROW(validate_sphmm(model));
  model.grouping = {0, 0, 0, 0, 1, 1, 2, 2, 2};
  CHECK_THROWS_AS(validate_sphmm(model), InvariantViolation);
}
