#include "identlab/distinguish.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "identlab/error.hpp"
#include "identlab/parallel.hpp"

namespace identlab {

SetSpec complement(const SetSpec& set) {
  return SetSpec{"not(" + set.name + ")", [pred = set.predicate](std::span<const double> x) { return !pred(x); },
                 set.arity};
}

Sampler m1_sampler(double mu, double sigma2, double rho) {
  EquicorrSpec base{.n = 1, .mu = mu, .sigma2 = sigma2, .rho = rho};
  base.validate();
  return [base](std::size_t n, Rng& rng) {
    EquicorrSpec spec = base;
    spec.n = n;
    return sample_m1(spec, rng);
  };
}

Sampler binary_sampler(const BinarySpec& spec) {
  spec.validate();
  // Solve r once instead of on every draw.
  BinarySpec resolved = spec;
  if (resolved.variant == BinaryVariant::M5 && !resolved.r_override) resolved.r_override = solve_m5_r(spec.p);
  return [resolved](std::size_t n, Rng& rng) {
    const BitVector bits = sample_binary(resolved, n, rng);
    return Sample(bits.begin(), bits.end());
  };
}

Sampler iid_normal_sampler(double mean, double sd) {
  if (!(sd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "iid_normal_sampler: sd must be >= 0");
  return [mean, sd](std::size_t n, Rng& rng) {
    std::normal_distribution<double> normal(mean, sd);
    Sample x(n);
    for (double& v : x) v = sd == 0.0 ? mean : normal(rng);
    return x;
  };
}

ProbEstimate estimate_set_prob(const Sampler& sampler, const SetSpec& set, std::size_t n, const McOptions& options,
                               const Stream& stream) {
  if (options.reps < 100) throw Error(ErrorCode::InvalidArgument, "estimate_set_prob: reps must be >= 100");
  if (set.arity && *set.arity != n) {
    throw Error(ErrorCode::ArityMismatch, "set '" + set.name + "' applies to n = " + std::to_string(*set.arity) +
                                              ", not " + std::to_string(n));
  }
  std::vector<std::uint8_t> hit(options.reps, 0);
  parallel_for(options.reps, options.threads, [&](std::size_t r) {
    Rng rng = stream.child(r).engine();
    const Sample x = sampler(n, rng);
    hit[r] = set.contains(x) ? 1 : 0;
  });
  ProbEstimate est;
  est.reps = options.reps;
  est.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), std::uint8_t{1}));
  est.p_hat = static_cast<double>(est.hits) / static_cast<double>(est.reps);
  est.ci = clopper_pearson(est.hits, est.reps, options.level);
  return est;
}

std::string_view to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::Distinguishing: return "Distinguishing";
    case VerdictKind::GapDistinguishing: return "GapDistinguishing";
    case VerdictKind::NotEstablished: return "NotEstablished";
  }
  return "?";
}

std::string Verdict::label() const {
  if (kind == VerdictKind::NotEstablished) return std::string(to_string(kind));
  std::ostringstream os;
  os << to_string(kind) << '(' << alpha << ',' << beta << ')';
  return os.str();
}

Verdict classify(const ProbEstimate& p1, const ProbEstimate& p2, double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= beta && beta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "thresholds must satisfy 0 < alpha <= beta <= 1");
  }
  Verdict v{VerdictKind::NotEstablished, alpha, beta};
  if (p1.ci.hi <= alpha && p2.ci.lo > beta) {
    v.kind = alpha < beta ? VerdictKind::GapDistinguishing : VerdictKind::Distinguishing;
  }
  return v;
}

std::optional<double> search_alpha_grid(const ProbEstimate& p1, const ProbEstimate& p2) {
  for (int i = 1; i <= 99; ++i) {
    const double alpha = i / 100.0;
    if (p1.ci.hi <= alpha && p2.ci.lo > alpha) return alpha;
  }
  return std::nullopt;
}

DistinguishReport check_distinguishing(const SetSpec& set, const Sampler& sampler1, const Sampler& sampler2,
                                       std::size_t n, double alpha, double beta, const DistinguishOptions& options,
                                       const Stream& stream) {
  DistinguishReport report;
  report.set_name = set.name;
  report.n = n;
  report.reps = options.mc.reps;
  report.level = options.mc.level;
  report.p1 = estimate_set_prob(sampler1, set, n, options.mc, stream.child(1));
  report.p2 = estimate_set_prob(sampler2, set, n, options.mc, stream.child(2));
  report.verdict = classify(report.p1, report.p2, alpha, beta);
  if (options.symmetric) {
    // P_2(not A) < 1 - beta and P_1(not A) >= 1 - alpha.
    DistinguishOptions once = options;
    once.symmetric = false;
    const double rev_alpha = std::max(1.0 - beta, 1e-12);
    const double rev_beta = std::max(1.0 - alpha, rev_alpha);
    report.reverse = std::make_shared<const DistinguishReport>(
        check_distinguishing(complement(set), sampler2, sampler1, n, rev_alpha, rev_beta, once, stream.child(3)));
  }
  return report;
}

DistinguishReport check_distinguishing_grid(const SetSpec& set, const Sampler& sampler1, const Sampler& sampler2,
                                            std::size_t n, const McOptions& options, const Stream& stream) {
  DistinguishReport report;
  report.set_name = set.name;
  report.n = n;
  report.reps = options.reps;
  report.level = options.level;
  report.p1 = estimate_set_prob(sampler1, set, n, options, stream.child(1));
  report.p2 = estimate_set_prob(sampler2, set, n, options, stream.child(2));
  if (const auto alpha = search_alpha_grid(report.p1, report.p2)) {
    report.verdict = Verdict{VerdictKind::Distinguishing, *alpha, *alpha};
  }
  return report;
}

PotentialReport check_potentially_distinguishing(const SetSpec& set,
                                                 const std::vector<std::pair<Sampler, Sampler>>& pairs,
                                                 std::size_t n, double alpha, const McOptions& options,
                                                 const Stream& stream) {
  if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "check_potentially_distinguishing: no pairs");
  PotentialReport out;
  out.not_refuted = true;
  DistinguishOptions opts{options, false};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.pairs.push_back(
        check_distinguishing(set, pairs[i].first, pairs[i].second, n, alpha, alpha, opts, stream.child(i)));
    out.not_refuted = out.not_refuted && out.pairs.back().verdict.kind == VerdictKind::Distinguishing;
  }
  return out;
}

SetSpec mu_distinguishing_set(double mu1, double mu2) {
  if (mu1 == mu2) throw Error(ErrorCode::EqualMeans, "mu_distinguishing_set: mu1 and mu2 must differ");
  std::ostringstream name;
  name << "|mean-" << mu1 << "|>|mean-" << mu2 << '|';
  return SetSpec{name.str(),
                 [mu1, mu2](std::span<const double> x) {
                   const double m = mean(x);
                   return std::abs(m - mu1) > std::abs(m - mu2);
                 },
                 std::nullopt};
}

SetSpec estimator_set(Estimator estimator, double lambda1, double lambda2, Metric metric) {
  if (!metric) metric = [](double a, double b) { return std::abs(a - b); };
  const double dist = metric(lambda1, lambda2);
  if (!(dist > 0.0)) throw Error(ErrorCode::EqualValues, "estimator_set: lambda1 and lambda2 must differ");
  const double eps = dist / 3.0;
  std::ostringstream name;
  name << "estimate in B(" << lambda2 << ',' << eps << ')';
  return SetSpec{name.str(),
                 [estimator = std::move(estimator), metric, lambda2, eps](std::span<const double> x) {
                   return metric(estimator(x), lambda2) <= eps;
                 },
                 std::nullopt};
}

double residual_sum_of_squares(std::span<const double> x) {
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss;
}

SetSpec residual_variance_above(double threshold) {
  std::ostringstream name;
  name << "residual_variance>" << threshold;
  return SetSpec{name.str(),
                 [threshold](std::span<const double> x) {
                   return residual_sum_of_squares(x) / static_cast<double>(x.size() - 1) > threshold;
                 },
                 std::nullopt};
}

PowerCurve power_curve_integral(const SetSpec& set, const MatchedPair& pair, const std::vector<double>& mu_grid,
                                std::size_t n, const McOptions& options, const Stream& stream) {
  if (mu_grid.size() < 3) throw Error(ErrorCode::GridTooNarrow, "power_curve_integral: need at least three grid points");
  for (std::size_t i = 1; i < mu_grid.size(); ++i) {
    if (!(mu_grid[i] > mu_grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "power_curve_integral: grid must increase");
  }
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    const double mirror = mu_grid[mu_grid.size() - 1 - i];
    if (std::abs(mu_grid[i] + mirror) > 1e-9 * (1.0 + std::abs(mirror))) {
      throw Error(ErrorCode::InvalidArgument, "power_curve_integral: grid must be symmetric about 0");
    }
  }
  const EquicorrSpec s1{.n = n, .mu = 0.0, .sigma2 = pair.sigma1_2, .rho = pair.rho1};
  const EquicorrSpec s2{.n = n, .mu = 0.0, .sigma2 = pair.sigma2_2, .rho = pair.rho2};
  // The truncated mu-range must hold all but 1e-6 of each sample-mean law.
  const double tau = std::sqrt(std::max(mean_law(s1).variance, mean_law(s2).variance));
  const double half_width = mu_grid.back();
  if (2.0 * normal_cdf(-half_width / tau) > 1e-6) {
    throw Error(ErrorCode::GridTooNarrow, "power_curve_integral: grid half-width " + std::to_string(half_width) +
                                              " too small for mean-law sd " + std::to_string(tau));
  }

  // Both parameter values share the replicate's random numbers, so the
  // difference is estimated from paired indicators and its SE is paired too.
  if (set.arity && *set.arity != n) {
    throw Error(ErrorCode::ArityMismatch, "set '" + set.name + "' applies to n = " + std::to_string(*set.arity));
  }
  if (options.reps < 100) throw Error(ErrorCode::InvalidArgument, "power_curve_integral: reps must be >= 100");
  PowerCurve curve;
  curve.mu = mu_grid;
  std::vector<std::uint8_t> hit1(options.reps);
  std::vector<std::uint8_t> hit2(options.reps);
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    EquicorrSpec a = s1;
    EquicorrSpec b = s2;
    a.mu = b.mu = mu_grid[i];
    parallel_for(options.reps, options.threads, [&](std::size_t r) {
      const Stream rep = stream.child(i, r);
      Rng g1 = rep.engine();
      Rng g2 = rep.engine();
      hit1[r] = set.contains(sample_m1(a, g1)) ? 1 : 0;
      hit2[r] = set.contains(sample_m1(b, g2)) ? 1 : 0;
    });
    auto estimate = [&](const std::vector<std::uint8_t>& hits) {
      ProbEstimate e;
      e.reps = options.reps;
      e.hits = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), std::uint8_t{1}));
      e.p_hat = static_cast<double>(e.hits) / static_cast<double>(e.reps);
      e.ci = clopper_pearson(e.hits, e.reps, options.level);
      return e;
    };
    curve.p1.push_back(estimate(hit1));
    curve.p2.push_back(estimate(hit2));
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < options.reps; ++r) {
      const double d = static_cast<double>(hit1[r]) - static_cast<double>(hit2[r]);
      sum += d;
      sum_sq += d * d;
    }
    const auto m = static_cast<double>(options.reps);
    const double var_d = std::max(0.0, (sum_sq - sum * sum / m) / (m - 1.0));
    curve.diff_se.push_back(std::sqrt(var_d / m));
  }
  double integral = 0.0;
  double variance = 0.0;
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    const double left = i > 0 ? mu_grid[i] - mu_grid[i - 1] : 0.0;
    const double right = i + 1 < mu_grid.size() ? mu_grid[i + 1] - mu_grid[i] : 0.0;
    const double w = 0.5 * (left + right);
    integral += w * (curve.p1[i].p_hat - curve.p2[i].p_hat);
    variance += w * w * curve.diff_se[i] * curve.diff_se[i];
  }
  curve.integral = integral;
  curve.integral_se = std::sqrt(variance);
  return curve;
}

KsReport residual_law_equality(const EquicorrSpec& spec1, const EquicorrSpec& spec2, std::size_t reps,
                               const Stream& stream, ResidualStatistic statistic, bool require_matched,
                               unsigned threads) {
  spec1.validate();
  spec2.validate();
  if (spec1.n != spec2.n) throw Error(ErrorCode::InvalidArgument, "residual_law_equality: specs must share n");
  if (spec1.n < 2) throw Error(ErrorCode::InvalidArgument, "residual_law_equality: need n >= 2");
  if (reps < 2) throw Error(ErrorCode::InvalidArgument, "residual_law_equality: need reps >= 2");
  const double v1 = spec1.residual_variance();
  const double v2 = spec2.residual_variance();
  if (require_matched && std::abs(v1 - v2) > 1e-12 * std::max(v1, v2)) {
    throw Error(ErrorCode::NotMatched, "residual_law_equality: (1-rho) sigma2 differs: " + std::to_string(v1) +
                                           " vs " + std::to_string(v2));
  }
  if (!statistic) statistic = residual_sum_of_squares;

  std::vector<double> a(reps);
  std::vector<double> b(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    Rng rng1 = stream.child(1, r).engine();
    Rng rng2 = stream.child(2, r).engine();
    std::vector<double> x = sample_m1(spec1, rng1);
    std::vector<double> y = sample_m1(spec2, rng2);
    const double mx = mean(x);
    const double my = mean(y);
    for (double& v : x) v -= mx;
    for (double& v : y) v -= my;
    a[r] = statistic(x);
    b[r] = statistic(y);
  });
  return KsReport{ks_two_sample(a, b), v1, v2, spec1.n, reps};
}

}  // namespace identlab
