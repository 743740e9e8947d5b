#include "emosid/gmm.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "emosid/errors.hpp"
#include "emosid/numeric.hpp"

namespace emosid {

MixtureScorer::MixtureScorer(const GaussianMixture &mixture) : mixture_(mixture) {
  const std::size_t k_comps = mixture.components();
  log_weight_.resize(k_comps);
  log_norm_.resize(k_comps);
  for (std::size_t k = 0; k < k_comps; ++k) {
    log_weight_[k] = std::log(mixture.weights[k]);
    double acc = 0.0;
    for (double v : mixture.variances[k]) acc += std::log(2.0 * std::numbers::pi * v);
    log_norm_[k] = -0.5 * acc;
  }
}

void MixtureScorer::component_log_densities(std::span<const double> x,
                                            std::span<double> out) const {
  const std::size_t k_comps = mixture_.components();
  for (std::size_t k = 0; k < k_comps; ++k) {
    const auto &mean = mixture_.means[k];
    const auto &var = mixture_.variances[k];
    double quad = 0.0;
    for (std::size_t d = 0; d < mean.size(); ++d) {
      const double diff = x[d] - mean[d];
      quad += diff * diff / var[d];
    }
    out[k] = log_weight_[k] + log_norm_[k] - 0.5 * quad;
  }
}

double MixtureScorer::log_density(std::span<const double> x) const {
  const std::size_t k_comps = mixture_.components();
  double acc = kLogZero;
  for (std::size_t k = 0; k < k_comps; ++k) {
    const auto &mean = mixture_.means[k];
    const auto &var = mixture_.variances[k];
    double quad = 0.0;
    for (std::size_t d = 0; d < mean.size(); ++d) {
      const double diff = x[d] - mean[d];
      quad += diff * diff / var[d];
    }
    acc = log_add(acc, log_weight_[k] + log_norm_[k] - 0.5 * quad);
  }
  return acc;
}

void validate_mixture(const GaussianMixture &mixture, double variance_floor_min) {
  const std::size_t k_comps = mixture.components();
  if (k_comps == 0 || mixture.means.size() != k_comps || mixture.variances.size() != k_comps)
    throw InvariantViolation("mixture component arrays disagree");
  const std::size_t dim = mixture.dim();
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < k_comps; ++k) {
    if (!(mixture.weights[k] > 0.0))
      throw InvariantViolation("mixture weight " + std::to_string(k) + " not positive");
    weight_sum += mixture.weights[k];
    if (mixture.means[k].size() != dim || mixture.variances[k].size() != dim)
      throw DimensionMismatch("mixture component dimension mismatch");
    for (double v : mixture.variances[k])
      if (v < variance_floor_min)
        throw InvariantViolation("variance below floor");
  }
  if (std::abs(weight_sum - 1.0) > 1e-9)
    throw InvariantViolation("mixture weights sum to " + std::to_string(weight_sum));
}

}  // namespace emosid
