#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "emosid/errors.hpp"
#include "emosid/hmm.hpp"
#include "emosid/numeric.hpp"

namespace emosid {

namespace {

struct PooledFrames {
  std::size_t dim = 0;
  std::vector<const double *> rows;
};

PooledFrames pool_frames(std::span<const FeatureMatrix> obs_set) {
  PooledFrames pooled;
  for (const auto &obs : obs_set) {
    if (obs.rows() == 0) continue;
    if (pooled.dim == 0) pooled.dim = obs.dim();
    if (obs.dim() != pooled.dim)
      throw DimensionMismatch("training sequences have mixed dimensions");
    for (std::size_t t = 0; t < obs.rows(); ++t) pooled.rows.push_back(obs.row(t).data());
  }
  return pooled;
}

double sq_distance(const double *a, const double *b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return acc;
}

// Lloyd iterations with seeded initialization; empty clusters are re-seeded
// to the point farthest from its current center.
std::vector<std::size_t> kmeans_assign(const PooledFrames &pooled, std::size_t n_clusters,
                                       std::mt19937_64 &rng,
                                       std::vector<std::vector<double>> &centers) {
  const std::size_t n = pooled.rows.size();
  const std::size_t dim = pooled.dim;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  centers.assign(n_clusters, std::vector<double>(dim));
  for (std::size_t c = 0; c < n_clusters; ++c) {
    const double *src = pooled.rows[order[c % n]];
    std::copy(src, src + dim, centers[c].begin());
  }

  std::vector<std::size_t> assignment(n, 0);
  for (int iteration = 0; iteration < 20; ++iteration) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (std::size_t c = 0; c < n_clusters; ++c) {
        const double d = sq_distance(pooled.rows[i], centers[c].data(), dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }

    std::vector<std::size_t> counts(n_clusters, 0);
    std::vector<std::vector<double>> sums(n_clusters, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      counts[assignment[i]]++;
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += pooled.rows[i][d];
    }
    for (std::size_t c = 0; c < n_clusters; ++c) {
      if (counts[c] == 0) {
        // Re-seed to the point farthest from its assigned center.
        std::size_t farthest = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq_distance(pooled.rows[i], centers[assignment[i]].data(), dim);
          if (d > far_d) {
            far_d = d;
            farthest = i;
          }
        }
        std::copy(pooled.rows[farthest], pooled.rows[farthest] + dim, centers[c].begin());
        assignment[farthest] = c;
        changed = true;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d)
        centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
    if (!changed && iteration > 0) break;
  }
  return assignment;
}

}  // namespace

GmmHmm init_model(std::span<const FeatureMatrix> obs_set, int n_states,
                  const TrainingConfig &config) {
  if (n_states <= 0 || config.n_mixtures <= 0)
    throw InvariantViolation("state and mixture counts must be positive");
  const PooledFrames pooled = pool_frames(obs_set);
  const std::size_t n_clusters =
      static_cast<std::size_t>(n_states) * static_cast<std::size_t>(config.n_mixtures);
  if (pooled.rows.size() < n_clusters)
    throw InsufficientData("need at least " + std::to_string(n_clusters) + " frames, got " +
                           std::to_string(pooled.rows.size()));

  const std::size_t dim = pooled.dim;
  const std::size_t n_frames = pooled.rows.size();

  // Global per-dimension moments drive the variance floor.
  std::vector<double> global_mean(dim, 0.0), global_var(dim, 0.0);
  for (const double *row : pooled.rows)
    for (std::size_t d = 0; d < dim; ++d) global_mean[d] += row[d];
  for (std::size_t d = 0; d < dim; ++d) global_mean[d] /= static_cast<double>(n_frames);
  for (const double *row : pooled.rows)
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = row[d] - global_mean[d];
      global_var[d] += diff * diff;
    }
  for (std::size_t d = 0; d < dim; ++d) global_var[d] /= static_cast<double>(n_frames);

  GmmHmm model;
  model.n_states = n_states;
  model.feature_dim = static_cast<int>(dim);
  model.variance_floor.resize(dim);
  for (std::size_t d = 0; d < dim; ++d)
    model.variance_floor[d] = std::max(config.variance_floor_scale * global_var[d],
                                       kVarianceFloorMin);

  std::mt19937_64 rng(derive_seed(config.rng_seed, 0x1a17u));
  std::vector<std::vector<double>> centers;
  const std::vector<std::size_t> assignment = kmeans_assign(pooled, n_clusters, rng, centers);

  std::vector<std::size_t> counts(n_clusters, 0);
  std::vector<std::vector<double>> scatter(n_clusters, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < n_frames; ++i) {
    const std::size_t c = assignment[i];
    counts[c]++;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = pooled.rows[i][d] - centers[c][d];
      scatter[c][d] += diff * diff;
    }
  }

  model.emissions.resize(static_cast<std::size_t>(n_states));
  const auto k_mix = static_cast<std::size_t>(config.n_mixtures);
  for (std::size_t s = 0; s < static_cast<std::size_t>(n_states); ++s) {
    GaussianMixture &mixture = model.emissions[s];
    mixture.weights.resize(k_mix);
    mixture.means.resize(k_mix);
    mixture.variances.resize(k_mix);
    double total = 0.0;
    for (std::size_t k = 0; k < k_mix; ++k) {
      const std::size_t c = s * k_mix + k;
      mixture.means[k] = centers[c];
      mixture.variances[k].resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        const double var = counts[c] > 0 ? scatter[c][d] / static_cast<double>(counts[c]) : 0.0;
        mixture.variances[k][d] = std::max(var, model.variance_floor[d]);
      }
      mixture.weights[k] = static_cast<double>(std::max<std::size_t>(counts[c], 1));
      total += mixture.weights[k];
    }
    for (double &w : mixture.weights) w /= total;
  }

  const auto n = static_cast<std::size_t>(n_states);
  model.initial_probs.assign(n, 1.0 / static_cast<double>(n));
  model.transitions.assign(n, std::vector<double>(n));
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      model.transitions[i][j] = (1.0 + 0.01 * jitter(rng)) / static_cast<double>(n);
      row_sum += model.transitions[i][j];
    }
    for (std::size_t j = 0; j < n; ++j) model.transitions[i][j] /= row_sum;
  }

  validate_hmm(model);
  return model;
}

BaumWelchResult baum_welch(const GmmHmm &initial, std::span<const FeatureMatrix> obs_set,
                           const TrainingConfig &config) {
  if (obs_set.empty()) throw InsufficientData("no training sequences");
  for (const auto &obs : obs_set) {
    if (obs.rows() == 0) throw EmptyObservation("training sequence is empty");
    if (obs.dim() != static_cast<std::size_t>(initial.feature_dim))
      throw DimensionMismatch("training sequence dimension disagrees with the model");
  }

  BaumWelchResult result;
  result.model = initial;
  if (result.model.variance_floor.empty())
    result.model.variance_floor.assign(static_cast<std::size_t>(initial.feature_dim),
                                       kVarianceFloorMin);

  const auto n = static_cast<std::size_t>(initial.n_states);
  const auto dim = static_cast<std::size_t>(initial.feature_dim);
  const auto k_mix = result.model.emissions.front().components();

  for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
    GmmHmm &model = result.model;

    std::vector<double> log_pi(n), log_trans(n * n);
    for (std::size_t j = 0; j < n; ++j) log_pi[j] = std::log(model.initial_probs[j]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        log_trans[i * n + j] = std::log(model.transitions[i][j]);
    std::vector<MixtureScorer> scorers;
    scorers.reserve(n);
    for (const auto &mixture : model.emissions) scorers.emplace_back(mixture);

    std::vector<double> pi_acc(n, 0.0);
    std::vector<double> trans_num(n * n, 0.0), trans_den(n, 0.0);
    std::vector<double> w_acc(n * k_mix, 0.0);
    std::vector<double> mean_acc(n * k_mix * dim, 0.0);
    std::vector<double> sqsum_acc(n * k_mix * dim, 0.0);
    double total_ll = 0.0;

    std::vector<double> comp_log, log_b, alpha, beta, terms(n);
    for (const auto &obs : obs_set) {
      const std::size_t t_len = obs.rows();
      comp_log.assign(t_len * n * k_mix, 0.0);
      log_b.assign(t_len * n, 0.0);
      for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t j = 0; j < n; ++j) {
          std::span<double> comps(comp_log.data() + (t * n + j) * k_mix, k_mix);
          scorers[j].component_log_densities(obs.row(t), comps);
          log_b[t * n + j] = log_sum_exp(comps);
        }

      alpha.assign(t_len * n, 0.0);
      for (std::size_t j = 0; j < n; ++j) alpha[j] = log_pi[j] + log_b[j];
      for (std::size_t t = 1; t < t_len; ++t)
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t i = 0; i < n; ++i)
            terms[i] = alpha[(t - 1) * n + i] + log_trans[i * n + j];
          alpha[t * n + j] = log_sum_exp(terms) + log_b[t * n + j];
        }

      beta.assign(t_len * n, 0.0);
      for (std::size_t t = t_len - 1; t-- > 0;)
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j)
            terms[j] = log_trans[i * n + j] + log_b[(t + 1) * n + j] + beta[(t + 1) * n + j];
          beta[t * n + i] = log_sum_exp(terms);
        }

      const double seq_ll = log_sum_exp({alpha.data() + (t_len - 1) * n, n});
      if (!std::isfinite(seq_ll))
        throw NumericalFailure("sequence log-likelihood is not finite");
      total_ll += seq_ll;

      for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t j = 0; j < n; ++j) {
          const double log_gamma = alpha[t * n + j] + beta[t * n + j] - seq_ll;
          const double gamma = std::exp(log_gamma);
          if (t == 0) pi_acc[j] += gamma;
          if (t + 1 < t_len) trans_den[j] += gamma;
          // Mixture-component share of the state responsibility.
          for (std::size_t k = 0; k < k_mix; ++k) {
            const double r =
                std::exp(log_gamma + comp_log[(t * n + j) * k_mix + k] - log_b[t * n + j]);
            if (r == 0.0) continue;
            w_acc[j * k_mix + k] += r;
            const auto row = obs.row(t);
            double *m = mean_acc.data() + (j * k_mix + k) * dim;
            double *s = sqsum_acc.data() + (j * k_mix + k) * dim;
            for (std::size_t d = 0; d < dim; ++d) {
              m[d] += r * row[d];
              s[d] += r * row[d] * row[d];
            }
          }
        }
        if (t + 1 < t_len)
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
              trans_num[i * n + j] +=
                  std::exp(alpha[t * n + i] + log_trans[i * n + j] + log_b[(t + 1) * n + j] +
                           beta[(t + 1) * n + j] - seq_ll);
      }
    }

    result.iteration_log_likelihoods.push_back(total_ll);
    if (iteration > 0) {
      const double previous = result.iteration_log_likelihoods[iteration - 1];
      const double improvement = (total_ll - previous) / std::abs(previous);
      if (improvement < config.rel_ll_tolerance) break;
    }

    // M-step. Starved states and components keep their previous parameters.
    double pi_total = 0.0;
    for (double p : pi_acc) pi_total += p;
    if (pi_total > 0.0)
      for (std::size_t j = 0; j < n; ++j) model.initial_probs[j] = pi_acc[j] / pi_total;

    for (std::size_t i = 0; i < n; ++i) {
      if (trans_den[i] <= 0.0) continue;
      double row_sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double a = std::max(trans_num[i * n + j] / trans_den[i], kTransitionFloor);
        model.transitions[i][j] = a;
        row_sum += a;
      }
      for (std::size_t j = 0; j < n; ++j) model.transitions[i][j] /= row_sum;
    }

    for (std::size_t j = 0; j < n; ++j) {
      double state_occ = 0.0;
      for (std::size_t k = 0; k < k_mix; ++k) state_occ += w_acc[j * k_mix + k];
      if (state_occ <= 0.0) continue;
      GaussianMixture &mixture = model.emissions[j];
      double weight_sum = 0.0;
      for (std::size_t k = 0; k < k_mix; ++k) {
        const double occ = w_acc[j * k_mix + k];
        if (occ < 1e-12) {
          mixture.weights[k] = std::max(mixture.weights[k], 1e-10);
          weight_sum += mixture.weights[k];
          continue;
        }
        mixture.weights[k] = std::max(occ / state_occ, 1e-10);
        weight_sum += mixture.weights[k];
        const double *m = mean_acc.data() + (j * k_mix + k) * dim;
        const double *s = sqsum_acc.data() + (j * k_mix + k) * dim;
        for (std::size_t d = 0; d < dim; ++d) {
          const double mean = m[d] / occ;
          mixture.means[k][d] = mean;
          const double var = s[d] / occ - mean * mean;
          mixture.variances[k][d] = std::max(var, model.variance_floor[d]);
        }
      }
      for (std::size_t k = 0; k < k_mix; ++k) mixture.weights[k] /= weight_sum;
    }
  }

  validate_hmm(result.model);
  return result;
}

GmmHmm train_hmm(std::span<const FeatureMatrix> obs_set, int n_states,
                 const TrainingConfig &config) {
  const GmmHmm seed_model = init_model(obs_set, n_states, config);
  return baum_welch(seed_model, obs_set, config).model;
}

}  // namespace emosid
