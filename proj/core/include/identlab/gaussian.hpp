#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "identlab/rng.hpp"

namespace identlab {

// Largest dimension any dense covariance in this library is built for.
inline constexpr std::size_t kMaxDimension = 10000;

struct MvNormal {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  // Throws InvalidArgument on shape/symmetry problems and NotPositiveDefinite
  // when the smallest eigenvalue is below -1e-10.
  void validate() const;
};

// Equicorrelated Gaussian: every coordinate has mean mu and variance sigma2,
// every pair has correlation rho in [0, 1).
struct EquicorrSpec {
  std::size_t n = 2;
  double mu = 0.0;
  double sigma2 = 1.0;
  double rho = 0.0;

  void validate() const;
  // (1 - rho) * sigma2, the variance left after removing the shared effect.
  double residual_variance() const { return (1.0 - rho) * sigma2; }
};

struct MeanLaw {
  double mean = 0.0;
  double variance = 0.0;
};

struct CholFactor {
  Eigen::MatrixXd lower;
};

enum class Definiteness { Positive, Semi };

// Lower Cholesky factor. Pivots at or below 1e-12 * max(diag) raise
// NotPositiveDefinite; in Semi mode pivots within that tolerance of zero
// produce a zero column instead (used for sampling degenerate laws).
CholFactor cholesky(const Eigen::MatrixXd& s, Definiteness mode = Definiteness::Positive);

// count x n matrix of draws, one per row.
Eigen::MatrixXd mvn_sample(const MvNormal& d, std::size_t count, Rng& rng);

// Law of the unobserved coordinates given the observed ones, in the original
// order of the unobserved indices.
MvNormal mvn_condition(const MvNormal& d, std::span<const std::size_t> observed_indices,
                       const Eigen::VectorXd& observed_values);

MvNormal equicorr_mvn(const EquicorrSpec& spec);

// Joint law of (X_1, ..., X_n, mean(X)), singular by construction.
MvNormal augmented_equicorr(const EquicorrSpec& spec);

// Closed form of L(X | mean(X) = xbar); free of spec.mu.
MvNormal conditional_given_mean(const EquicorrSpec& spec, double xbar);

// The same conditional law computed by Schur conditioning of the augmented system.
MvNormal conditional_given_mean_schur(const EquicorrSpec& spec, double xbar);

MeanLaw mean_law(const EquicorrSpec& spec);

}  // namespace identlab
