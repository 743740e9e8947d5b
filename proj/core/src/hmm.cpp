#include "emosid/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emosid/errors.hpp"
#include "emosid/numeric.hpp"

namespace emosid {

namespace {

void check_observation(const GmmHmm &model, const FeatureMatrix &obs) {
  if (obs.rows() == 0) throw EmptyObservation("observation sequence is empty");
  if (obs.dim() != static_cast<std::size_t>(model.feature_dim))
    throw DimensionMismatch("model expects dim " + std::to_string(model.feature_dim) +
                            ", observation has dim " + std::to_string(obs.dim()));
}

}  // namespace

void validate_hmm(const GmmHmm &model) {
  const auto n = static_cast<std::size_t>(model.n_states);
  if (n == 0) throw InvariantViolation("model has no states");
  if (model.initial_probs.size() != n || model.transitions.size() != n ||
      model.emissions.size() != n)
    throw InvariantViolation("model arrays disagree with n_states");
  double pi_sum = 0.0;
  for (double p : model.initial_probs) {
    if (p < 0.0) throw InvariantViolation("negative initial probability");
    pi_sum += p;
  }
  if (std::abs(pi_sum - 1.0) > 1e-9)
    throw InvariantViolation("initial probabilities sum to " + std::to_string(pi_sum));
  for (const auto &row : model.transitions) {
    if (row.size() != n) throw InvariantViolation("transition matrix not square");
    double row_sum = 0.0;
    for (double a : row) {
      if (!(a > 0.0)) throw InvariantViolation("non-positive transition breaks ergodicity");
      row_sum += a;
    }
    if (std::abs(row_sum - 1.0) > 1e-9)
      throw InvariantViolation("transition row sums to " + std::to_string(row_sum));
  }
  for (const auto &mixture : model.emissions) {
    if (mixture.dim() != static_cast<std::size_t>(model.feature_dim))
      throw DimensionMismatch("emission dimension disagrees with feature_dim");
    validate_mixture(mixture, kVarianceFloorMin);
  }
}

double log_forward(const GmmHmm &model, const FeatureMatrix &obs) {
  check_observation(model, obs);
  const auto n = static_cast<std::size_t>(model.n_states);
  const std::size_t t_len = obs.rows();

  std::vector<double> log_trans(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) log_trans[i * n + j] = std::log(model.transitions[i][j]);

  std::vector<MixtureScorer> scorers;
  scorers.reserve(n);
  for (const auto &mixture : model.emissions) scorers.emplace_back(mixture);

  std::vector<double> alpha(n), next(n), terms(n);
  for (std::size_t j = 0; j < n; ++j)
    alpha[j] = std::log(model.initial_probs[j]) + scorers[j].log_density(obs.row(0));

  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) terms[i] = alpha[i] + log_trans[i * n + j];
      next[j] = log_sum_exp(terms) + scorers[j].log_density(obs.row(t));
    }
    alpha.swap(next);
  }
  const double ll = log_sum_exp(alpha);
  if (std::isnan(ll)) throw NumericalFailure("forward produced NaN");
  return ll;
}

ViterbiResult viterbi(const GmmHmm &model, const FeatureMatrix &obs) {
  check_observation(model, obs);
  const auto n = static_cast<std::size_t>(model.n_states);
  const std::size_t t_len = obs.rows();

  std::vector<double> log_trans(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) log_trans[i * n + j] = std::log(model.transitions[i][j]);

  std::vector<MixtureScorer> scorers;
  scorers.reserve(n);
  for (const auto &mixture : model.emissions) scorers.emplace_back(mixture);

  std::vector<double> delta(n), next(n);
  std::vector<int> backptr(t_len * n, 0);
  for (std::size_t j = 0; j < n; ++j)
    delta[j] = std::log(model.initial_probs[j]) + scorers[j].log_density(obs.row(0));

  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kLogZero;
      int best_i = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double cand = delta[i] + log_trans[i * n + j];
        if (cand > best) {
          best = cand;
          best_i = static_cast<int>(i);
        }
      }
      next[j] = best + scorers[j].log_density(obs.row(t));
      backptr[t * n + j] = best_i;
    }
    delta.swap(next);
  }

  ViterbiResult result;
  std::size_t best_j = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (delta[j] > delta[best_j]) best_j = j;
  result.log_prob = delta[best_j];

  result.path.resize(t_len);
  result.path[t_len - 1] = static_cast<int>(best_j);
  for (std::size_t t = t_len - 1; t > 0; --t)
    result.path[t - 1] = backptr[t * n + static_cast<std::size_t>(result.path[t])];
  return result;
}

}  // namespace emosid
