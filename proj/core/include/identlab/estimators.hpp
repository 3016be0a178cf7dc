#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "identlab/models.hpp"
#include "identlab/rng.hpp"

namespace identlab {

struct RhoEstimate {
  double rho_hat = 0.0;
  double lambda1_hat = 0.0;  // variance along the all-ones direction
  double lambda2_hat = 0.0;  // variance orthogonal to it
};

inline constexpr double kRhoClipMax = 1.0 - 1e-9;

// Maximum likelihood estimate of rho in the equicorrelated model when mu is
// known, clipped to [0, 1 - 1e-9].
RhoEstimate rho_mle_known_mu(std::span<const double> x, double mu);

// Same estimator pooled over independent replicate sequences of equal length:
// lambda1 averages n (mean_s - mu)^2 over sequences and lambda2 pools the
// within-sequence variances.
RhoEstimate rho_pooled_known_mu(const std::vector<std::vector<double>>& sequences, double mu);

struct VarCompEstimate {
  double tau2_2_hat = 0.0;  // pooled within-group variance
  double grand_mean = 0.0;
  std::vector<double> group_means;
};

VarCompEstimate var_components_m2(const std::vector<std::vector<double>>& groups);

struct ScanResult {
  double statistic = 0.0;
  std::size_t split_index = 0;  // number of observations before the split
  double p_value = 1.0;
};

inline constexpr std::size_t kMinScanNullReps = 2000;

// Max over splits of |mean_before - mean_after| standardised with the pooled
// Bernoulli variance. Returns 0 (split 0) for constant input.
ScanResult scan_statistic(const BitVector& x);

// Scan statistic with a Monte Carlo p-value from i.i.d. Bernoulli(mean(x))
// null sequences of the same length.
ScanResult changepoint_scan(const BitVector& x, std::size_t null_reps, const Stream& stream);

}  // namespace identlab
