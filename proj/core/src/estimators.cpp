#include "identlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "identlab/error.hpp"

namespace identlab {

namespace {

RhoEstimate rho_from_lambdas(double lambda1, double lambda2, std::size_t n) {
  RhoEstimate est;
  est.lambda1_hat = lambda1;
  est.lambda2_hat = lambda2;
  const double denom = lambda1 + static_cast<double>(n - 1) * lambda2;
  const double raw = denom > 0.0 ? (lambda1 - lambda2) / denom : 0.0;
  est.rho_hat = std::clamp(raw, 0.0, kRhoClipMax);
  return est;
}

}  // namespace

RhoEstimate rho_mle_known_mu(std::span<const double> x, double mu) {
  if (x.size() < 2) throw Error(ErrorCode::InsufficientData, "rho_mle_known_mu: need at least two observations");
  const auto n = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  const double xbar = sum / n;
  double ss = 0.0;
  for (double v : x) ss += (v - xbar) * (v - xbar);
  const double lambda1 = n * (xbar - mu) * (xbar - mu);
  const double lambda2 = ss / (n - 1.0);
  if (lambda1 == 0.0 && lambda2 == 0.0) {
    throw Error(ErrorCode::DegenerateSample, "rho_mle_known_mu: all observations equal mu");
  }
  return rho_from_lambdas(lambda1, lambda2, x.size());
}

RhoEstimate rho_pooled_known_mu(const std::vector<std::vector<double>>& sequences, double mu) {
  if (sequences.empty()) throw Error(ErrorCode::InsufficientData, "rho_pooled_known_mu: no sequences");
  const std::size_t n = sequences.front().size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "rho_pooled_known_mu: sequences need length >= 2");
  double lambda1 = 0.0;
  double ss = 0.0;
  for (const auto& s : sequences) {
    if (s.size() != n) throw Error(ErrorCode::InvalidArgument, "rho_pooled_known_mu: sequences must share a length");
    double sum = 0.0;
    for (double v : s) sum += v;
    const double xbar = sum / static_cast<double>(n);
    lambda1 += static_cast<double>(n) * (xbar - mu) * (xbar - mu);
    for (double v : s) ss += (v - xbar) * (v - xbar);
  }
  const auto m = static_cast<double>(sequences.size());
  lambda1 /= m;
  const double lambda2 = ss / (m * static_cast<double>(n - 1));
  if (lambda1 == 0.0 && lambda2 == 0.0) {
    throw Error(ErrorCode::DegenerateSample, "rho_pooled_known_mu: all observations equal mu");
  }
  return rho_from_lambdas(lambda1, lambda2, n);
}

VarCompEstimate var_components_m2(const std::vector<std::vector<double>>& groups) {
  VarCompEstimate est;
  std::size_t total = 0;
  std::size_t informative = 0;
  double ss = 0.0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) {
      est.group_means.push_back(std::nan(""));
      continue;
    }
    double sum = 0.0;
    for (double v : g) sum += v;
    const double m = sum / static_cast<double>(g.size());
    for (double v : g) ss += (v - m) * (v - m);
    est.group_means.push_back(m);
    grand_sum += sum;
    total += g.size();
    if (g.size() >= 2) ++informative;
  }
  if (informative == 0) {
    throw Error(ErrorCode::InsufficientData, "var_components_m2: need a group with at least two observations");
  }
  const std::size_t nonempty = static_cast<std::size_t>(
      std::count_if(groups.begin(), groups.end(), [](const auto& g) { return !g.empty(); }));
  est.tau2_2_hat = ss / static_cast<double>(total - nonempty);
  est.grand_mean = grand_sum / static_cast<double>(total);
  return est;
}

ScanResult scan_statistic(const BitVector& x) {
  const std::size_t n = x.size();
  std::size_t ones = 0;
  for (auto b : x) ones += b;
  ScanResult result;
  if (ones == 0 || ones == n) return result;

  const double p = static_cast<double>(ones) / static_cast<double>(n);
  const double pooled = p * (1.0 - p);
  std::size_t before = 0;
  for (std::size_t t = 1; t < n; ++t) {
    before += x[t - 1];
    const auto left = static_cast<double>(t);
    const auto right = static_cast<double>(n - t);
    const double diff = static_cast<double>(before) / left - static_cast<double>(ones - before) / right;
    const double z = std::abs(diff) / std::sqrt(pooled * (1.0 / left + 1.0 / right));
    if (z > result.statistic) {
      result.statistic = z;
      result.split_index = t;
    }
  }
  return result;
}

ScanResult changepoint_scan(const BitVector& x, std::size_t null_reps, const Stream& stream) {
  if (x.size() < 4) throw Error(ErrorCode::InsufficientData, "changepoint_scan: need at least four observations");
  if (null_reps < kMinScanNullReps) {
    throw Error(ErrorCode::InvalidArgument, "changepoint_scan: need at least " + std::to_string(kMinScanNullReps) +
                                                " null replicates");
  }
  ScanResult observed = scan_statistic(x);
  if (observed.statistic == 0.0) {
    observed.p_value = 1.0;
    return observed;
  }
  std::size_t ones = 0;
  for (auto b : x) ones += b;
  const double p_hat = static_cast<double>(ones) / static_cast<double>(x.size());

  Rng rng = stream.engine();
  std::bernoulli_distribution coin(p_hat);
  BitVector null_x(x.size());
  std::size_t exceed = 0;
  const double threshold = observed.statistic * (1.0 - 1e-12);
  for (std::size_t r = 0; r < null_reps; ++r) {
    for (auto& b : null_x) b = coin(rng) ? 1 : 0;
    if (scan_statistic(null_x).statistic >= threshold) ++exceed;
  }
  observed.p_value = static_cast<double>(exceed) / static_cast<double>(null_reps);
  return observed;
}

}  // namespace identlab
