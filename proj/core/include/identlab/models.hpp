#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "identlab/gaussian.hpp"
#include "identlab/rng.hpp"

namespace identlab {

using BitVector = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// Equicorrelated model, random-effect form: X_i = mu + Z + E_i with
// Var(Z) = rho * sigma2 and Var(E_i) = (1 - rho) * sigma2.
std::vector<double> sample_m1(const EquicorrSpec& spec, Rng& rng);

// sigma2 for rho2 such that both parameter sets share (1 - rho) * sigma2.
double matched_pair(double rho1, double rho2, double sigma1_2);

// ---------------------------------------------------------------------------
// Two-level model X_ij = mu + Z_i + E_ij with a fixed number of groups.
struct TwoLevelSpec {
  double mu = 0.0;
  double tau1_2 = 1.0;  // between-group variance
  double tau2_2 = 1.0;  // within-group variance
  std::vector<std::size_t> group_sizes;

  void validate() const;
  std::size_t total() const;
};

std::vector<std::vector<double>> sample_m2(const TwoLevelSpec& spec, Rng& rng);

// ---------------------------------------------------------------------------
// Binary sequences with Bernoulli(p) marginals.
enum class BinaryVariant { M3, M4, M5, ChangePoint };

std::string_view to_string(BinaryVariant v);
BinaryVariant binary_variant_from_string(std::string_view name);

struct BinarySpec {
  BinaryVariant variant = BinaryVariant::M3;
  double p = 0.5;
  // ChangePoint: positions 1..m_cp-1 use the pre-change probability q.
  std::size_t m_cp = 1;
  // M5: replaces the solved mixing probability r.
  std::optional<double> r_override{};
  // ChangePoint: fixes q instead of drawing it from U(0,1) per sequence.
  std::optional<double> q_fixed{};

  void validate() const;
};

BitVector sample_binary(const BinarySpec& spec, std::size_t n, Rng& rng);

// P(X_j = 1) under each branch of the M5 mixture, for position j (1-based).
struct M5BranchMarginals {
  double given_y1 = 0.0;
  double given_y0 = 0.0;
};
M5BranchMarginals m5_branch_marginals(double p, std::size_t position);

// Mixing probability r making every marginal of M5 Bernoulli(p), checked for
// all positions up to `horizon`.
double solve_m5_r(double p, std::size_t horizon = 64);

// The literal closed form 2q / (q + 1), q = min(p, 1 - p).
double m5_r_literal(double p);

// ---------------------------------------------------------------------------
// Fixed classification model: row i ~ N_p(centers[labels[i]], sigma2 I).
// Labels are 0-based row indices into `centers`.
struct FixedClassSpec {
  Eigen::MatrixXd centers;  // k x p, rows strictly lexicographically increasing
  double sigma2 = 1.0;
  std::vector<std::size_t> labels;

  std::size_t k() const { return static_cast<std::size_t>(centers.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(centers.cols()); }
  void validate() const;
};

Eigen::MatrixXd sample_fixed_class(const FixedClassSpec& spec, Rng& rng);
// Only the first n labels are used.
Eigen::MatrixXd sample_fixed_class(const FixedClassSpec& spec, std::size_t n, Rng& rng);

// ---------------------------------------------------------------------------
// Fixed classification model associated to a mixture: P is decomposed over
// the Voronoi cells of its population k-means centers, and row i is drawn
// from P restricted to cell labels[i].
using PointSampler = std::function<Eigen::VectorXd(Rng&)>;

struct MixtureFixedClassSpec {
  PointSampler base_sampler;
  std::size_t dim = 1;
  std::size_t k = 2;
  Eigen::MatrixXd pop_centers;  // k x dim, lexicographically ordered
  std::vector<double> proportions;
  std::vector<std::size_t> labels;
  // Fraction of reference points equidistant (within 1e-12) to two centers.
  double boundary_mass = 0.0;
  std::size_t reference_size = 0;

  void validate() const;
};

struct AssociatedMixtureOptions {
  std::size_t approx_budget = 1'000'000;
  std::size_t restarts = 8;
  std::size_t n_labels = 0;
};

MixtureFixedClassSpec associated_mixture(PointSampler base_sampler, std::size_t dim, std::size_t k,
                                         const AssociatedMixtureOptions& options, Rng& rng);

// i.i.d. categorical labels with the given proportions.
std::vector<std::size_t> draw_labels(const std::vector<double>& proportions, std::size_t n, Rng& rng);

// One draw from P restricted to Voronoi cell `cell`.
Eigen::VectorXd sample_cell(const MixtureFixedClassSpec& spec, std::size_t cell, Rng& rng);
Eigen::MatrixXd sample_mixture_fixed_class(const MixtureFixedClassSpec& spec, std::size_t n, Rng& rng);

// Base distributions used by presets and tests.
PointSampler gaussian_mixture_1d(std::vector<double> means, std::vector<double> weights, double sd);
PointSampler two_point_1d(double a, double b);

}  // namespace identlab
