#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace emosid {

/// Diagonal-covariance Gaussian mixture: the emission density of one state.
struct GaussianMixture {
  std::vector<double> weights;               // K, positive, sums to 1
  std::vector<std::vector<double>> means;      // K x D
  std::vector<std::vector<double>> variances;  // K x D, every entry >= floor

  std::size_t components() const { return weights.size(); }
  std::size_t dim() const { return means.empty() ? 0 : means.front().size(); }
};

/// Scoring tables derived from a mixture: log weights and the Gaussian
/// normalization constants, precomputed once per scoring pass.
struct MixtureScorer {
  explicit MixtureScorer(const GaussianMixture &mixture);

  /// Log density of the full mixture at x.
  double log_density(std::span<const double> x) const;

  /// Per-component log(w_k * N_k(x)), written into `out` (size K).
  void component_log_densities(std::span<const double> x, std::span<double> out) const;

 private:
  const GaussianMixture &mixture_;
  std::vector<double> log_weight_;
  std::vector<double> log_norm_;  // -0.5 * sum_d log(2*pi*var_kd)
};

/// Validates weight normalization, dimensions and the variance floor.
void validate_mixture(const GaussianMixture &mixture, double variance_floor_min);

}  // namespace emosid
