#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "identlab/gaussian.hpp"
#include "identlab/models.hpp"
#include "identlab/rng.hpp"
#include "identlab/stats.hpp"

namespace identlab {

using Sample = std::vector<double>;
// Draws one length-n sample from a fixed parameter value.
using Sampler = std::function<Sample(std::size_t n, Rng& rng)>;

// A pre-registered observable event.
struct SetSpec {
  std::string name;
  std::function<bool(std::span<const double>)> predicate;
  std::optional<std::size_t> arity;  // unset: any sample length

  bool contains(std::span<const double> sample) const { return predicate(sample); }
};

SetSpec complement(const SetSpec& set);

Sampler m1_sampler(double mu, double sigma2, double rho);
Sampler binary_sampler(const BinarySpec& spec);
Sampler iid_normal_sampler(double mean, double sd);

struct McOptions {
  std::size_t reps = 10'000;
  double level = 0.99;
  unsigned threads = 0;
};

struct ProbEstimate {
  double p_hat = 0.0;
  Interval ci;
  std::size_t hits = 0;
  std::size_t reps = 0;
};

ProbEstimate estimate_set_prob(const Sampler& sampler, const SetSpec& set, std::size_t n, const McOptions& options,
                               const Stream& stream);

enum class VerdictKind { Distinguishing, GapDistinguishing, NotEstablished };

std::string_view to_string(VerdictKind v);

struct Verdict {
  VerdictKind kind = VerdictKind::NotEstablished;
  double alpha = 0.0;
  double beta = 0.0;

  std::string label() const;
};

struct DistinguishReport {
  std::string set_name;
  std::size_t n = 0;
  std::size_t reps = 0;
  double level = 0.99;
  ProbEstimate p1;
  ProbEstimate p2;
  Verdict verdict;
  // Rerun with the roles of the two parameter values exchanged and the
  // complementary set, when requested.
  std::shared_ptr<const DistinguishReport> reverse;
};

// A verdict is issued only when the confidence bounds clear the thresholds:
// ci1.hi <= alpha and ci2.lo > beta. alpha == beta gives Distinguishing,
// alpha < beta GapDistinguishing.
Verdict classify(const ProbEstimate& p1, const ProbEstimate& p2, double alpha, double beta);

// Smallest alpha on the grid {0.01, ..., 0.99} with ci1.hi <= alpha < ci2.lo.
std::optional<double> search_alpha_grid(const ProbEstimate& p1, const ProbEstimate& p2);

struct DistinguishOptions {
  McOptions mc;
  bool symmetric = false;
};

DistinguishReport check_distinguishing(const SetSpec& set, const Sampler& sampler1, const Sampler& sampler2,
                                       std::size_t n, double alpha, double beta, const DistinguishOptions& options,
                                       const Stream& stream);

// Same, with alpha = beta chosen by search_alpha_grid.
DistinguishReport check_distinguishing_grid(const SetSpec& set, const Sampler& sampler1, const Sampler& sampler2,
                                            std::size_t n, const McOptions& options, const Stream& stream);

// Pairs standing in for the existential set D: the set must (alpha, alpha)-
// distinguish every listed pair. The verdict means "not refuted on the grid".
struct PotentialReport {
  std::vector<DistinguishReport> pairs;
  bool not_refuted = false;
};
PotentialReport check_potentially_distinguishing(const SetSpec& set,
                                                 const std::vector<std::pair<Sampler, Sampler>>& pairs,
                                                 std::size_t n, double alpha, const McOptions& options,
                                                 const Stream& stream);

// {|mean - mu1| > |mean - mu2|}.
SetSpec mu_distinguishing_set(double mu1, double mu2);

using Estimator = std::function<double(std::span<const double>)>;
using Metric = std::function<double(double, double)>;

// {d(estimate, lambda2) <= d(lambda1, lambda2) / 3}, a closed ball.
SetSpec estimator_set(Estimator estimator, double lambda1, double lambda2, Metric metric = {});

// Set defined through the residuals x - mean(x) only.
SetSpec residual_variance_above(double threshold);
double residual_sum_of_squares(std::span<const double> x);

// Two equicorrelated parameter values sharing (1 - rho) sigma2.
struct MatchedPair {
  double rho1 = 0.2;
  double sigma1_2 = 1.0;
  double rho2 = 0.6;
  double sigma2_2 = 2.0;
};

struct PowerCurve {
  std::vector<double> mu;
  std::vector<ProbEstimate> p1;
  std::vector<ProbEstimate> p2;
  std::vector<double> diff_se;  // SE of p1_hat - p2_hat from the paired replicates
  double integral = 0.0;
  double integral_se = 0.0;
};

// Trapezoid rule over mu of P_{mu, pair 1}(A) - P_{mu, pair 2}(A). Replicate r
// at a grid point feeds the same random numbers to both parameter values.
PowerCurve power_curve_integral(const SetSpec& set, const MatchedPair& pair, const std::vector<double>& mu_grid,
                                std::size_t n, const McOptions& options, const Stream& stream);

using ResidualStatistic = std::function<double(std::span<const double>)>;

struct KsReport {
  KsResult ks;
  double residual_variance1 = 0.0;
  double residual_variance2 = 0.0;
  std::size_t n = 0;
  std::size_t reps = 0;
};

// Two-sample KS on a statistic of the residuals x - mean(x) under two
// equicorrelated specs (default statistic: residual sum of squares).
// NotMatched unless (1 - rho) sigma2 agrees, unless require_matched is false.
KsReport residual_law_equality(const EquicorrSpec& spec1, const EquicorrSpec& spec2, std::size_t reps,
                               const Stream& stream, ResidualStatistic statistic = {}, bool require_matched = true,
                               unsigned threads = 0);

}  // namespace identlab
