#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace identlab {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Standard normal CDF; erfc keeps relative accuracy in both tails.
double normal_cdf(double x);
double normal_quantile(double p);

// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
Interval clopper_pearson(std::size_t successes, std::size_t trials, double level);

struct KsResult {
  double statistic = 0.0;  // sup |F1 - F2|
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
// distribution (Stephens' small-sample correction on the effective size).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

// P(Binomial(trials, p) = successes).
double binomial_pmf(std::size_t successes, std::size_t trials, double p);

double mean(std::span<const double> x);
// Unbiased sample variance (n - 1 denominator).
double sample_variance(std::span<const double> x);
// Monte Carlo standard error of sample_variance, from the fourth central moment.
double sample_variance_se(std::span<const double> x);
// Linear-interpolation quantile (R type 7).
double quantile(std::span<const double> x, double prob);
double interquartile_range(std::span<const double> x);

}  // namespace identlab
