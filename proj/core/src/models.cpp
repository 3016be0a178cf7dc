#include "identlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "identlab/error.hpp"
#include "identlab/kmeans.hpp"

namespace identlab {

// ---------------------------------------------------------------------------
// Equicorrelated model

std::vector<double> sample_m1(const EquicorrSpec& spec, Rng& rng) {
  spec.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  const double shared_sd = std::sqrt(spec.rho * spec.sigma2);
  const double noise_sd = std::sqrt(spec.residual_variance());
  const double z = shared_sd * normal(rng);
  std::vector<double> x(spec.n);
  for (double& v : x) v = spec.mu + z + noise_sd * normal(rng);
  return x;
}

double matched_pair(double rho1, double rho2, double sigma1_2) {
  if (!(rho1 >= 0.0 && rho1 < 1.0) || !(rho2 >= 0.0 && rho2 < 1.0)) {
    throw Error(ErrorCode::InvalidRho, "matched_pair: rho values must lie in [0, 1)");
  }
  if (!(sigma1_2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "matched_pair: sigma1_2 must be > 0");
  return (1.0 - rho1) / (1.0 - rho2) * sigma1_2;
}

// ---------------------------------------------------------------------------
// Two-level model

void TwoLevelSpec::validate() const {
  if (group_sizes.empty()) throw Error(ErrorCode::InvalidArgument, "TwoLevelSpec: need at least one group");
  if (std::any_of(group_sizes.begin(), group_sizes.end(), [](std::size_t s) { return s == 0; })) {
    throw Error(ErrorCode::InvalidArgument, "TwoLevelSpec: group sizes must be positive");
  }
  if (!(tau1_2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "TwoLevelSpec: tau1_2 must be >= 0");
  if (!(tau2_2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "TwoLevelSpec: tau2_2 must be > 0");
}

std::size_t TwoLevelSpec::total() const {
  return std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
}

std::vector<std::vector<double>> sample_m2(const TwoLevelSpec& spec, Rng& rng) {
  spec.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  const double between_sd = std::sqrt(spec.tau1_2);
  const double within_sd = std::sqrt(spec.tau2_2);
  std::vector<std::vector<double>> groups;
  groups.reserve(spec.group_sizes.size());
  for (std::size_t size : spec.group_sizes) {
    const double z = between_sd * normal(rng);
    std::vector<double> g(size);
    for (double& v : g) v = spec.mu + z + within_sd * normal(rng);
    groups.push_back(std::move(g));
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Binary models

std::string_view to_string(BinaryVariant v) {
  switch (v) {
    case BinaryVariant::M3: return "M3";
    case BinaryVariant::M4: return "M4";
    case BinaryVariant::M5: return "M5";
    case BinaryVariant::ChangePoint: return "ChangePoint";
  }
  return "?";
}

BinaryVariant binary_variant_from_string(std::string_view name) {
  if (name == "M3") return BinaryVariant::M3;
  if (name == "M4") return BinaryVariant::M4;
  if (name == "M5") return BinaryVariant::M5;
  if (name == "ChangePoint") return BinaryVariant::ChangePoint;
  throw Error(ErrorCode::InvalidArgument, "unknown binary variant '" + std::string(name) + "'");
}

void BinarySpec::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidP, "BinarySpec: p must lie in (0, 1)");
  if (variant == BinaryVariant::ChangePoint && m_cp < 1) {
    throw Error(ErrorCode::InvalidArgument, "BinarySpec: m_cp must be >= 1");
  }
  if (r_override && !(*r_override >= 0.0 && *r_override <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "BinarySpec: r_override must lie in [0, 1]");
  }
  if (q_fixed && !(*q_fixed >= 0.0 && *q_fixed <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "BinarySpec: q_fixed must lie in [0, 1]");
  }
}

namespace {

// Positions before m_cp use q, the rest p. With m_cp == 1 no q is drawn, so
// this is also the i.i.d. sampler.
BitVector sample_with_change(double p, std::size_t m_cp, std::optional<double> q_fixed, std::size_t n, Rng& rng) {
  double q = p;
  if (m_cp > 1) q = q_fixed ? *q_fixed : draw_uniform(rng);
  BitVector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double prob = (i + 1 < m_cp) ? q : p;
    x[i] = draw_bernoulli(rng, prob) ? 1 : 0;
  }
  return x;
}

BitVector sample_m5(double p, double r, std::size_t n, Rng& rng) {
  const bool reflect = p > 0.5;
  const double q = reflect ? 1.0 - p : p;
  const bool alternating = draw_bernoulli(rng, r);
  BitVector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (alternating) {
      // odd positions (1-based) are fair coins, even ones flip the previous
      x[i] = (i % 2 == 0) ? (draw_bernoulli(rng, 0.5) ? 1 : 0) : static_cast<std::uint8_t>(1 - x[i - 1]);
    } else {
      x[i] = draw_bernoulli(rng, 0.5 * q) ? 1 : 0;
    }
  }
  if (reflect) {
    for (auto& b : x) b = static_cast<std::uint8_t>(1 - b);
  }
  return x;
}

}  // namespace

BitVector sample_binary(const BinarySpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample_binary: n must be >= 1");
  switch (spec.variant) {
    case BinaryVariant::M3:
      return sample_with_change(spec.p, 1, std::nullopt, n, rng);
    case BinaryVariant::ChangePoint:
      return sample_with_change(spec.p, spec.m_cp, spec.q_fixed, n, rng);
    case BinaryVariant::M4:
      return BitVector(n, draw_bernoulli(rng, spec.p) ? 1 : 0);
    case BinaryVariant::M5:
      return sample_m5(spec.p, spec.r_override ? *spec.r_override : solve_m5_r(spec.p), n, rng);
  }
  throw Error(ErrorCode::InvalidArgument, "sample_binary: unknown variant");
}

M5BranchMarginals m5_branch_marginals(double p, std::size_t position) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidP, "m5_branch_marginals: p must lie in (0, 1)");
  if (position < 1) throw Error(ErrorCode::InvalidArgument, "m5_branch_marginals: positions are 1-based");
  const bool reflect = p > 0.5;
  const double q = reflect ? 1.0 - p : p;
  // Alternating branch: position 1 is a fair coin and every later position is
  // either a fresh fair coin (odd) or one minus a fair coin (even).
  const double y1 = 0.5;
  const double y0 = 0.5 * q;
  return reflect ? M5BranchMarginals{1.0 - y1, 1.0 - y0} : M5BranchMarginals{y1, y0};
}

double solve_m5_r(double p, std::size_t horizon) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidP, "solve_m5_r: p must lie in (0, 1)");
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "solve_m5_r: horizon must be >= 1");
  std::optional<double> r;
  for (std::size_t j = 1; j <= horizon; ++j) {
    const M5BranchMarginals m = m5_branch_marginals(p, j);
    const double denom = m.given_y1 - m.given_y0;
    if (std::abs(denom) < 1e-15) {
      if (std::abs(m.given_y0 - p) > 1e-12) {
        throw Error(ErrorCode::NoValidR, "solve_m5_r: position " + std::to_string(j) + " cannot reach p");
      }
      continue;
    }
    const double rj = (p - m.given_y0) / denom;
    if (rj < -1e-12 || rj > 1.0 + 1e-12) {
      throw Error(ErrorCode::NoValidR, "solve_m5_r: position " + std::to_string(j) + " needs r outside [0,1]");
    }
    if (r && std::abs(*r - rj) > 1e-12) {
      throw Error(ErrorCode::NoValidR, "solve_m5_r: position " + std::to_string(j) + " disagrees with earlier positions");
    }
    if (!r) r = rj;
  }
  return std::clamp(r.value_or(0.0), 0.0, 1.0);
}

double m5_r_literal(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidP, "m5_r_literal: p must lie in (0, 1)");
  const double q = p <= 0.5 ? p : 1.0 - p;
  return 2.0 * q / (q + 1.0);
}

// ---------------------------------------------------------------------------
// Fixed classification

namespace {

bool lex_less(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (m(a, c) < m(b, c)) return true;
    if (m(a, c) > m(b, c)) return false;
  }
  return false;
}

void check_lex_ordered(const Eigen::MatrixXd& centers, const char* what) {
  for (Eigen::Index j = 1; j < centers.rows(); ++j) {
    if (!lex_less(centers, j - 1, j)) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + ": centers must be distinct and lexicographically ordered");
    }
  }
}

}  // namespace

void FixedClassSpec::validate() const {
  if (centers.rows() < 1 || centers.cols() < 1) throw Error(ErrorCode::InvalidArgument, "FixedClassSpec: no centers");
  check_lex_ordered(centers, "FixedClassSpec");
  if (!(sigma2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "FixedClassSpec: sigma2 must be >= 0");
  for (std::size_t g : labels) {
    if (g >= k()) throw Error(ErrorCode::IndexOutOfRange, "FixedClassSpec: label " + std::to_string(g) + " out of range");
  }
}

Eigen::MatrixXd sample_fixed_class(const FixedClassSpec& spec, Rng& rng) {
  return sample_fixed_class(spec, spec.labels.size(), rng);
}

Eigen::MatrixXd sample_fixed_class(const FixedClassSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n > spec.labels.size()) throw Error(ErrorCode::InvalidArgument, "sample_fixed_class: more rows than labels");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(spec.sigma2);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), spec.centers.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto g = static_cast<Eigen::Index>(spec.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(i, c) = spec.centers(g, c) + sd * normal(rng);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Associated mixture

void MixtureFixedClassSpec::validate() const {
  if (!base_sampler) throw Error(ErrorCode::InvalidArgument, "MixtureFixedClassSpec: missing base sampler");
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "MixtureFixedClassSpec: k must be > 1");
  if (pop_centers.rows() != static_cast<Eigen::Index>(k) || pop_centers.cols() != static_cast<Eigen::Index>(dim)) {
    throw Error(ErrorCode::InvalidArgument, "MixtureFixedClassSpec: center matrix has the wrong shape");
  }
  check_lex_ordered(pop_centers, "MixtureFixedClassSpec");
  if (proportions.size() != k) throw Error(ErrorCode::InvalidArgument, "MixtureFixedClassSpec: need k proportions");
  const double total = std::accumulate(proportions.begin(), proportions.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9 || std::any_of(proportions.begin(), proportions.end(), [](double w) { return w < 0.0; })) {
    throw Error(ErrorCode::InvalidArgument, "MixtureFixedClassSpec: proportions must be a probability vector");
  }
  for (std::size_t g : labels) {
    if (g >= k) throw Error(ErrorCode::IndexOutOfRange, "MixtureFixedClassSpec: label out of range");
  }
}

std::vector<std::size_t> draw_labels(const std::vector<double>& proportions, std::size_t n, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(proportions.begin(), proportions.end());
  std::vector<std::size_t> labels(n);
  for (auto& g : labels) g = pick(rng);
  return labels;
}

MixtureFixedClassSpec associated_mixture(PointSampler base_sampler, std::size_t dim, std::size_t k,
                                         const AssociatedMixtureOptions& options, Rng& rng) {
  if (!base_sampler) throw Error(ErrorCode::InvalidArgument, "associated_mixture: missing base sampler");
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "associated_mixture: k must be > 1");
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "associated_mixture: dim must be >= 1");
  if (options.approx_budget < 10 * k) throw Error(ErrorCode::InvalidArgument, "associated_mixture: budget too small");

  Eigen::MatrixXd reference(static_cast<Eigen::Index>(options.approx_budget), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < reference.rows(); ++i) {
    const Eigen::VectorXd x = base_sampler(rng);
    if (x.size() != static_cast<Eigen::Index>(dim)) throw Error(ErrorCode::InvalidArgument, "associated_mixture: sampler dimension mismatch");
    reference.row(i) = x.transpose();
  }

  LloydOptions lloyd_options;
  lloyd_options.restarts = options.restarts;
  const KMeansFit fit = lloyd(reference, k, lloyd_options, rng);

  std::vector<std::size_t> counts(k, 0);
  std::size_t ties = 0;
  for (Eigen::Index i = 0; i < reference.rows(); ++i) {
    ++counts[fit.labels[static_cast<std::size_t>(i)]];
    // condition (5): distance to the two nearest centers must differ
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    for (Eigen::Index j = 0; j < fit.centers.rows(); ++j) {
      const double d = (reference.row(i) - fit.centers.row(j)).squaredNorm();
      if (d < best) {
        second = best;
        best = d;
      } else if (d < second) {
        second = d;
      }
    }
    if (second - best <= 1e-12 * (1.0 + best)) ++ties;
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] < 10) {
      throw Error(ErrorCode::DegenerateBase, "associated_mixture: cell " + std::to_string(j) + " has only " +
                                                 std::to_string(counts[j]) + " reference points");
    }
  }

  MixtureFixedClassSpec spec;
  spec.base_sampler = std::move(base_sampler);
  spec.dim = dim;
  spec.k = k;
  spec.pop_centers = fit.centers;
  spec.reference_size = options.approx_budget;
  spec.boundary_mass = static_cast<double>(ties) / static_cast<double>(options.approx_budget);
  spec.proportions.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    spec.proportions[j] = static_cast<double>(counts[j]) / static_cast<double>(options.approx_budget);
  }
  if (options.n_labels > 0) spec.labels = draw_labels(spec.proportions, options.n_labels, rng);
  return spec;
}

Eigen::VectorXd sample_cell(const MixtureFixedClassSpec& spec, std::size_t cell, Rng& rng) {
  if (cell >= spec.k) throw Error(ErrorCode::IndexOutOfRange, "sample_cell: cell out of range");
  constexpr std::size_t kMaxRejections = 1'000'000;
  for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
    Eigen::VectorXd x = spec.base_sampler(rng);
    if (voronoi_assign(x, spec.pop_centers) == cell) return x;
  }
  throw Error(ErrorCode::DegenerateBase, "sample_cell: rejection sampling did not hit cell " + std::to_string(cell));
}

Eigen::MatrixXd sample_mixture_fixed_class(const MixtureFixedClassSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n > spec.labels.size()) throw Error(ErrorCode::InvalidArgument, "sample_mixture_fixed_class: more rows than labels");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.dim));
  for (std::size_t i = 0; i < n; ++i) x.row(static_cast<Eigen::Index>(i)) = sample_cell(spec, spec.labels[i], rng).transpose();
  return x;
}

PointSampler gaussian_mixture_1d(std::vector<double> means, std::vector<double> weights, double sd) {
  if (means.empty() || means.size() != weights.size()) {
    throw Error(ErrorCode::InvalidArgument, "gaussian_mixture_1d: means and weights must match");
  }
  if (!(sd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gaussian_mixture_1d: sd must be >= 0");
  std::vector<double> cumulative(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  const double total = cumulative.back();
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "gaussian_mixture_1d: weights must sum to > 0");
  for (double& c : cumulative) c /= total;
  return [means = std::move(means), cumulative = std::move(cumulative), sd](Rng& rng) {
    const double u = draw_uniform(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end() - 1, u);
    const auto c = static_cast<std::size_t>(it - cumulative.begin());
    Eigen::VectorXd x(1);
    x(0) = means[c] + sd * draw_normal(rng);
    return x;
  };
}

PointSampler two_point_1d(double a, double b) {
  return [a, b](Rng& rng) {
    Eigen::VectorXd x(1);
    x(0) = draw_bernoulli(rng, 0.5) ? b : a;
    return x;
  };
}

}  // namespace identlab
