#include "identlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "identlab/distinguish.hpp"
#include "identlab/error.hpp"
#include "identlab/estimators.hpp"
#include "identlab/gaussian.hpp"
#include "identlab/kmeans.hpp"
#include "identlab/models.hpp"
#include "identlab/parallel.hpp"
#include "identlab/report.hpp"
#include "identlab/serialize.hpp"
#include "identlab/stats.hpp"

#ifndef IDENTLAB_VERSION
#define IDENTLAB_VERSION "0.0.0"
#endif

namespace identlab {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view library_version() { return IDENTLAB_VERSION; }

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kExperimentNames[] = {
    {ExperimentKind::ConditionalGivenMean, "verify-lemma1"},
    {ExperimentKind::MeanVariance, "mean-variance"},
    {ExperimentKind::MatchedPair, "matched-pair"},
    {ExperimentKind::RhoNonconsistency, "rho-nonconsistency"},
    {ExperimentKind::MuDistinguish, "mu-distinguish"},
    {ExperimentKind::M2Components, "m2-components"},
    {ExperimentKind::BinaryDistinguish, "binary-distinguish"},
    {ExperimentKind::ChangepointCalibration, "changepoint-calibration"},
    {ExperimentKind::KmeansConsistency, "kmeans-consistency"},
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

bool is_count(const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); }

// Typed access to the experiment parameter object. Every key read is
// recorded; finish() rejects the rest.
class ParamReader {
 public:
  ParamReader(const json& params, std::string_view experiment) : params_(params), experiment_(experiment) {
    if (!params_.is_object()) config_error(experiment_ + ": params must be an object");
  }

  double number(const char* key, double fallback) {
    used_.insert(key);
    if (!params_.contains(key)) return fallback;
    const json& v = params_.at(key);
    if (!v.is_number()) config_error(experiment_ + ": params." + key + " must be a number");
    return v.get<double>();
  }

  std::size_t count(const char* key, std::size_t fallback) {
    used_.insert(key);
    if (!params_.contains(key)) return fallback;
    const json& v = params_.at(key);
    if (!is_count(v)) config_error(experiment_ + ": params." + key + " must be a non-negative integer");
    return v.get<std::size_t>();
  }

  std::vector<double> numbers(const char* key, std::vector<double> fallback) {
    used_.insert(key);
    if (!params_.contains(key)) return fallback;
    const json& v = params_.at(key);
    if (!v.is_array() || v.empty()) config_error(experiment_ + ": params." + key + " must be a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) config_error(experiment_ + ": params." + key + " must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& item : params_.items()) {
      if (!used_.contains(item.key())) config_error(experiment_ + ": unknown parameter '" + item.key() + "'");
    }
  }

 private:
  const json& params_;
  std::string experiment_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& what) {
  if (!ok) config_error(what);
}

std::vector<std::size_t> n_values_or(const ExperimentConfig& c, std::vector<std::size_t> fallback) {
  return c.n_values.empty() ? fallback : c.n_values;
}

std::size_t reps_or(const ExperimentConfig& c, std::size_t fallback) { return c.reps == 0 ? fallback : c.reps; }

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return format_number(v); }

// ---------------------------------------------------------------------------
// Run context shared by all experiments.

class Context {
 public:
  Context(const ExperimentConfig& config, const RunOptions& options, fs::path out, RunManifest& manifest)
      : config_(config), options_(options), out_(std::move(out)), manifest_(manifest), root_(config.seed) {}

  const Stream& root() const { return root_; }
  unsigned threads() const { return options_.threads; }
  double level() const { return config_.ci_level; }
  McOptions mc(std::size_t reps) const { return McOptions{reps, config_.ci_level, options_.threads}; }

  void write_csv(const std::string& name, const CsvTable& table) {
    table.write(out_ / name);
    record(name);
  }

  void write_json(const std::string& name, const json& doc) {
    std::ofstream f(out_ / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + (out_ / name).string());
    f << doc.dump(2) << '\n';
    f.close();
    record(name);
  }

  void plot(const std::string& csv, const PlotSpec& spec, const std::string& svg) {
    if (!options_.plots) return;
    plot_csv(out_ / csv, spec, out_ / svg);
    record(svg);
  }

  void check(std::string name, bool passed, std::string detail) {
    manifest_.checks.push_back(CheckResult{std::move(name), passed, std::move(detail)});
  }

 private:
  void record(const std::string& name) { manifest_.files.push_back(OutputFile{name, file_checksum(out_ / name)}); }

  const ExperimentConfig& config_;
  const RunOptions& options_;
  fs::path out_;
  RunManifest& manifest_;
  Stream root_;
};

std::string detail(std::initializer_list<std::pair<const char*, std::string>> fields) {
  std::string s;
  for (const auto& [k, v] : fields) {
    if (!s.empty()) s += ", ";
    s += k;
    s += '=';
    s += v;
  }
  return s;
}

// ---------------------------------------------------------------------------
// verify-lemma1: conditional law given the sample mean

struct ConditionalLawParams {
  std::vector<std::size_t> n_values;
  std::vector<double> rho_values;
  double sigma2, xbar, mu, mu_alt, tolerance;
};

ConditionalLawParams parse_conditional_law(const ExperimentConfig& c) {
  ParamReader r(c.params, "verify-lemma1");
  ConditionalLawParams p;
  p.n_values = n_values_or(c, {2, 5, 25, 200});
  p.rho_values = r.numbers("rho_values", {0.0, 0.3, 0.9});
  p.sigma2 = r.number("sigma2", 1.0);
  p.xbar = r.number("xbar", 0.7);
  p.mu = r.number("mu", 0.0);
  p.mu_alt = r.number("mu_alt", 7.0);
  p.tolerance = r.number("tolerance", 1e-9);
  r.finish();
  for (double rho : p.rho_values) require(rho >= 0.0 && rho < 1.0, "verify-lemma1: rho values must lie in [0,1)");
  require(p.sigma2 > 0.0, "verify-lemma1: sigma2 must be > 0");
  for (auto n : p.n_values) require(n >= 2 && n <= 2000, "verify-lemma1: n values must lie in [2, 2000]");
  return p;
}

void run_conditional_law(const ConditionalLawParams& p, Context& ctx) {
  CsvTable table({"n", "rho", "sigma2", "xbar", "max_mean_dev", "max_cov_dev", "mu_shift_dev", "max_row_sum"});
  double worst = 0.0;
  double worst_shift = 0.0;
  double worst_row = 0.0;
  for (std::size_t n : p.n_values) {
    for (double rho : p.rho_values) {
      const EquicorrSpec spec{.n = n, .mu = p.mu, .sigma2 = p.sigma2, .rho = rho};
      EquicorrSpec shifted = spec;
      shifted.mu = p.mu_alt;
      const MvNormal closed = conditional_given_mean(spec, p.xbar);
      const MvNormal schur = conditional_given_mean_schur(spec, p.xbar);
      const MvNormal closed_shifted = conditional_given_mean(shifted, p.xbar);
      const MvNormal schur_shifted = conditional_given_mean_schur(shifted, p.xbar);
      const double mean_dev = (closed.mean - schur.mean).cwiseAbs().maxCoeff();
      const double cov_dev = (closed.cov - schur.cov).cwiseAbs().maxCoeff();
      const double shift_dev = std::max({(closed.mean - closed_shifted.mean).cwiseAbs().maxCoeff(),
                                         (closed.cov - closed_shifted.cov).cwiseAbs().maxCoeff(),
                                         (schur.mean - schur_shifted.mean).cwiseAbs().maxCoeff(),
                                         (schur.cov - schur_shifted.cov).cwiseAbs().maxCoeff()});
      const double row_sum = closed.cov.rowwise().sum().cwiseAbs().maxCoeff();
      worst = std::max({worst, mean_dev, cov_dev});
      worst_shift = std::max(worst_shift, shift_dev);
      worst_row = std::max(worst_row, row_sum);
      table.row({num(n), num(rho), num(p.sigma2), num(p.xbar), num(mean_dev), num(cov_dev), num(shift_dev), num(row_sum)});
    }
  }
  ctx.write_csv("conditional_law.csv", table);
  ctx.plot("conditional_law.csv", PlotSpec{.title = "closed form vs Schur conditioning", .x = "n", .y = "max_cov_dev",
                                  .group = "rho", .log_x = true},
           "conditional_law.svg");
  ctx.check("closed-form conditional law matches Schur conditioning", worst < p.tolerance,
            detail({{"max_dev", num(worst)}, {"tolerance", num(p.tolerance)}}));
  ctx.check("conditional law does not depend on mu", worst_shift < p.tolerance,
            detail({{"max_dev", num(worst_shift)}}));
  ctx.check("conditional covariance rows sum to zero", worst_row < p.tolerance, detail({{"max_row_sum", num(worst_row)}}));
}

// ---------------------------------------------------------------------------
// mean-variance

struct MeanVarianceParams {
  std::vector<std::size_t> n_values;
  std::size_t reps;
  double mu, sigma2, rho, z_max;
};

MeanVarianceParams parse_mean_variance(const ExperimentConfig& c) {
  ParamReader r(c.params, "mean-variance");
  MeanVarianceParams p;
  p.n_values = n_values_or(c, {10, 10000});
  p.reps = reps_or(c, 100000);
  p.mu = r.number("mu", 0.0);
  p.sigma2 = r.number("sigma2", 1.0);
  p.rho = r.number("rho", 0.5);
  p.z_max = r.number("z_max", 3.0);
  r.finish();
  require(p.rho >= 0.0 && p.rho < 1.0, "mean-variance: rho must lie in [0,1)");
  require(p.sigma2 > 0.0, "mean-variance: sigma2 must be > 0");
  require(p.reps >= 4, "mean-variance: reps must be >= 4");
  for (auto n : p.n_values) require(n >= 1 && n <= kMaxDimension, "mean-variance: n out of range");
  return p;
}

void run_mean_variance(const MeanVarianceParams& p, Context& ctx) {
  CsvTable table({"n", "rho", "sigma2", "reps", "var_hat", "se", "exact", "z"});
  for (std::size_t gi = 0; gi < p.n_values.size(); ++gi) {
    const EquicorrSpec spec{.n = p.n_values[gi], .mu = p.mu, .sigma2 = p.sigma2, .rho = p.rho};
    std::vector<double> means(p.reps);
    parallel_for(p.reps, ctx.threads(), [&](std::size_t r) {
      Rng rng = ctx.root().child(gi, r).engine();
      means[r] = mean(sample_m1(spec, rng));
    });
    const double var_hat = sample_variance(means);
    const double se = sample_variance_se(means);
    const double exact = mean_law(spec).variance;
    const double z = (var_hat - exact) / se;
    table.row({num(spec.n), num(p.rho), num(p.sigma2), num(p.reps), num(var_hat), num(se), num(exact), num(z)});
    ctx.check("Var(mean) at n=" + num(spec.n) + " within " + num(p.z_max) + " SE of the exact law",
              std::abs(z) <= p.z_max, detail({{"var_hat", num(var_hat)}, {"exact", num(exact)}, {"z", num(z)}}));
  }
  ctx.write_csv("mean_variance.csv", table);
  ctx.plot("mean_variance.csv", PlotSpec{.title = "variance of the sample mean", .x = "n", .y = "var_hat", .log_x = true},
           "mean_variance.svg");
}

// ---------------------------------------------------------------------------
// matched-pair (residual law equality and the integral identity)

struct MatchedPairParams {
  MatchedPair pair;
  double control_sigma2_2;
  std::size_t n, reps, curve_n, curve_reps;
  double ks_alpha, mu_half_width, mu_step, integral_z_max, pointwise_z_min;
};

MatchedPairParams parse_matched_pair(const ExperimentConfig& c) {
  ParamReader r(c.params, "matched-pair");
  MatchedPairParams p;
  p.pair.rho1 = r.number("rho1", 0.2);
  p.pair.sigma1_2 = r.number("sigma1_2", 1.0);
  p.pair.rho2 = r.number("rho2", 0.6);
  require(p.pair.rho1 >= 0.0 && p.pair.rho1 < 1.0 && p.pair.rho2 >= 0.0 && p.pair.rho2 < 1.0,
          "matched-pair: rho values must lie in [0,1)");
  require(p.pair.sigma1_2 > 0.0, "matched-pair: sigma1_2 must be > 0");
  p.pair.sigma2_2 = matched_pair(p.pair.rho1, p.pair.rho2, p.pair.sigma1_2);
  p.control_sigma2_2 = r.number("control_sigma2_2", 1.0);
  p.n = n_values_or(c, {100}).front();
  p.reps = reps_or(c, 10000);
  p.ks_alpha = r.number("ks_alpha", 0.001);
  p.curve_n = r.count("curve_n", 50);
  p.curve_reps = r.count("curve_reps", 10000);
  p.mu_half_width = r.number("mu_half_width", 10.0);
  p.mu_step = r.number("mu_step", 0.25);
  p.integral_z_max = r.number("integral_z_max", 3.0);
  p.pointwise_z_min = r.number("pointwise_z_min", 5.0);
  r.finish();
  require(p.control_sigma2_2 > 0.0, "matched-pair: control_sigma2_2 must be > 0");
  require(p.n >= 2 && p.curve_n >= 1, "matched-pair: sample sizes too small");
  require(p.mu_step > 0.0 && p.mu_half_width > p.mu_step, "matched-pair: bad mu grid");
  require(p.curve_reps >= 100 && p.reps >= 2, "matched-pair: too few replicates");
  return p;
}

void run_matched_pair(const MatchedPairParams& p, Context& ctx) {
  const EquicorrSpec spec1{.n = p.n, .mu = 0.0, .sigma2 = p.pair.sigma1_2, .rho = p.pair.rho1};
  const EquicorrSpec spec2{.n = p.n, .mu = 0.0, .sigma2 = p.pair.sigma2_2, .rho = p.pair.rho2};
  const EquicorrSpec control{.n = p.n, .mu = 0.0, .sigma2 = p.control_sigma2_2, .rho = p.pair.rho2};

  const KsReport matched = residual_law_equality(spec1, spec2, p.reps, ctx.root().child(1), {}, true, ctx.threads());
  const KsReport unmatched = residual_law_equality(spec1, control, p.reps, ctx.root().child(2), {}, false, ctx.threads());

  CsvTable ks({"comparison", "rho1", "sigma1_2", "rho2", "sigma2_2", "residual_var1", "residual_var2", "n", "reps",
               "ks_statistic", "p_value", "rejected"});
  auto ks_row = [&](const char* label, const EquicorrSpec& b, const KsReport& rep) {
    ks.row({label, num(spec1.rho), num(spec1.sigma2), num(b.rho), num(b.sigma2), num(rep.residual_variance1),
            num(rep.residual_variance2), num(rep.n), num(rep.reps), num(rep.ks.statistic), num(rep.ks.p_value),
            rep.ks.p_value < p.ks_alpha ? "1" : "0"});
  };
  ks_row("matched", spec2, matched);
  ks_row("control", control, unmatched);
  ctx.write_csv("ks.csv", ks);
  ctx.check("matched pair: KS on residual sum of squares does not reject", matched.ks.p_value >= p.ks_alpha,
            detail({{"D", num(matched.ks.statistic)}, {"p", num(matched.ks.p_value)}, {"alpha", num(p.ks_alpha)}}));
  ctx.check("unmatched control: KS rejects", unmatched.ks.p_value < p.ks_alpha,
            detail({{"D", num(unmatched.ks.statistic)}, {"p", num(unmatched.ks.p_value)}}));

  const auto half = static_cast<long>(std::llround(p.mu_half_width / p.mu_step));
  std::vector<double> grid;
  for (long i = -half; i <= half; ++i) grid.push_back(static_cast<double>(i) * p.mu_step);
  const SetSpec positive_mean{"mean>0", [](std::span<const double> x) { return mean(x) > 0.0; }, std::nullopt};
  const PowerCurve curve =
      power_curve_integral(positive_mean, p.pair, grid, p.curve_n, ctx.mc(p.curve_reps), ctx.root().child(3));

  CsvTable pc({"mu", "p1_hat", "p1_lo", "p1_hi", "p2_hat", "p2_lo", "p2_hi", "diff", "diff_se"});
  double max_z = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double diff = curve.p1[i].p_hat - curve.p2[i].p_hat;
    if (curve.diff_se[i] > 0.0) max_z = std::max(max_z, std::abs(diff) / curve.diff_se[i]);
    pc.row({num(grid[i]), num(curve.p1[i].p_hat), num(curve.p1[i].ci.lo), num(curve.p1[i].ci.hi), num(curve.p2[i].p_hat),
            num(curve.p2[i].ci.lo), num(curve.p2[i].ci.hi), num(diff), num(curve.diff_se[i])});
  }
  ctx.write_csv("power_curve.csv", pc);
  CsvTable integral({"set", "n", "reps", "integral", "integral_se", "max_abs_z"});
  integral.row({positive_mean.name, num(p.curve_n), num(p.curve_reps), num(curve.integral), num(curve.integral_se), num(max_z)});
  ctx.write_csv("power_integral.csv", integral);
  ctx.plot("power_curve.csv", PlotSpec{.title = "P1(A) - P2(A) over mu", .x = "mu", .y = "diff", .reference_y = 0.0},
           "power_curve.svg");

  ctx.check("integral of the power-curve difference is zero within " + num(p.integral_z_max) + " SE",
            std::abs(curve.integral) <= p.integral_z_max * curve.integral_se,
            detail({{"integral", num(curve.integral)}, {"se", num(curve.integral_se)}}));
  ctx.check("pointwise power difference exceeds " + num(p.pointwise_z_min) + " SE somewhere", max_z > p.pointwise_z_min,
            detail({{"max_abs_z", num(max_z)}}));
}

// ---------------------------------------------------------------------------
// rho-nonconsistency

struct RhoParams {
  std::vector<std::size_t> n_values;
  std::size_t reps, seq_len, pooled_reps;
  std::vector<double> seq_counts;
  double mu, sigma2, rho, ratio_lo, ratio_hi, pooled_shrink_min;
};

RhoParams parse_rho(const ExperimentConfig& c) {
  ParamReader r(c.params, "rho-nonconsistency");
  RhoParams p;
  p.n_values = n_values_or(c, {100, 10000});
  p.reps = reps_or(c, 10000);
  p.mu = r.number("mu", 0.0);
  p.sigma2 = r.number("sigma2", 1.0);
  p.rho = r.number("rho", 0.5);
  p.seq_len = r.count("seq_len", 10);
  p.seq_counts = r.numbers("seq_counts", {100, 10000});
  p.pooled_reps = r.count("pooled_reps", 1000);
  p.ratio_lo = r.number("ratio_lo", 0.8);
  p.ratio_hi = r.number("ratio_hi", 1.25);
  p.pooled_shrink_min = r.number("pooled_shrink_min", 3.0);
  r.finish();
  require(p.rho >= 0.0 && p.rho < 1.0, "rho-nonconsistency: rho must lie in [0,1)");
  require(p.sigma2 > 0.0, "rho-nonconsistency: sigma2 must be > 0");
  require(p.n_values.size() >= 2 && p.seq_counts.size() >= 2, "rho-nonconsistency: need two sizes per design");
  require(p.seq_len >= 2 && p.reps >= 4 && p.pooled_reps >= 4, "rho-nonconsistency: sizes too small");
  for (double s : p.seq_counts) require(s >= 1 && s == std::floor(s), "rho-nonconsistency: seq_counts must be integers");
  return p;
}

void run_rho(const RhoParams& p, Context& ctx) {
  CsvTable table({"design", "n", "sequences", "reps", "q25", "median", "q75", "iqr"});
  std::vector<double> single_iqr;
  std::vector<double> pooled_iqr;
  for (std::size_t gi = 0; gi < p.n_values.size(); ++gi) {
    const EquicorrSpec spec{.n = p.n_values[gi], .mu = p.mu, .sigma2 = p.sigma2, .rho = p.rho};
    std::vector<double> est(p.reps);
    parallel_for(p.reps, ctx.threads(), [&](std::size_t r) {
      Rng rng = ctx.root().child(1, gi).child(r).engine();
      est[r] = rho_mle_known_mu(sample_m1(spec, rng), p.mu).rho_hat;
    });
    single_iqr.push_back(interquartile_range(est));
    table.row({"single", num(spec.n), "1", num(p.reps), num(quantile(est, 0.25)), num(quantile(est, 0.5)),
               num(quantile(est, 0.75)), num(single_iqr.back())});
  }
  for (std::size_t gi = 0; gi < p.seq_counts.size(); ++gi) {
    const auto count = static_cast<std::size_t>(p.seq_counts[gi]);
    const EquicorrSpec spec{.n = p.seq_len, .mu = p.mu, .sigma2 = p.sigma2, .rho = p.rho};
    std::vector<double> est(p.pooled_reps);
    parallel_for(p.pooled_reps, ctx.threads(), [&](std::size_t r) {
      Rng rng = ctx.root().child(2, gi).child(r).engine();
      std::vector<std::vector<double>> seqs(count);
      for (auto& s : seqs) s = sample_m1(spec, rng);
      est[r] = rho_pooled_known_mu(seqs, p.mu).rho_hat;
    });
    pooled_iqr.push_back(interquartile_range(est));
    table.row({"pooled", num(p.seq_len), num(count), num(p.pooled_reps), num(quantile(est, 0.25)),
               num(quantile(est, 0.5)), num(quantile(est, 0.75)), num(pooled_iqr.back())});
  }
  ctx.write_csv("rho_iqr.csv", table);
  ctx.plot("rho_iqr.csv", PlotSpec{.title = "IQR of rho estimates", .x = "reps", .y = "iqr", .group = "design"}, "rho_iqr.svg");

  const double ratio = single_iqr.back() / single_iqr.front();
  ctx.check("single-sequence rho estimate does not concentrate (IQR ratio in [" + num(p.ratio_lo) + ", " +
                num(p.ratio_hi) + "])",
            ratio >= p.ratio_lo && ratio <= p.ratio_hi,
            detail({{"iqr_small_n", num(single_iqr.front())}, {"iqr_large_n", num(single_iqr.back())}, {"ratio", num(ratio)}}));
  const double shrink = pooled_iqr.front() / pooled_iqr.back();
  ctx.check("pooled replication design concentrates (IQR shrinks >= " + num(p.pooled_shrink_min) + "x)",
            shrink >= p.pooled_shrink_min,
            detail({{"iqr_few", num(pooled_iqr.front())}, {"iqr_many", num(pooled_iqr.back())}, {"shrink", num(shrink)}}));
}

// ---------------------------------------------------------------------------
// Shared distinguish CSV

CsvTable distinguish_table() {
  return CsvTable({"set", "n", "reps", "p1_hat", "p1_lo", "p1_hi", "p2_hat", "p2_lo", "p2_hi", "verdict"});
}

void add_distinguish_row(CsvTable& t, const DistinguishReport& r, const std::string& label) {
  t.row({label, num(r.n), num(r.reps), num(r.p1.p_hat), num(r.p1.ci.lo), num(r.p1.ci.hi), num(r.p2.p_hat),
         num(r.p2.ci.lo), num(r.p2.ci.hi), r.verdict.label()});
}

// ---------------------------------------------------------------------------
// mu-distinguish

struct MuParams {
  double mu1, mu2, sigma2, threshold;
  std::vector<double> rho_values;
  std::size_t n, reps;
};

MuParams parse_mu(const ExperimentConfig& c) {
  ParamReader r(c.params, "mu-distinguish");
  MuParams p;
  p.mu1 = r.number("mu1", 0.0);
  p.mu2 = r.number("mu2", 1.0);
  p.sigma2 = r.number("sigma2", 1.0);
  p.rho_values = r.numbers("rho_values", {0.0, 0.5, 0.9});
  p.threshold = r.number("threshold", 0.5);
  p.n = n_values_or(c, {20}).front();
  p.reps = reps_or(c, 100000);
  r.finish();
  require(p.mu1 != p.mu2, "mu-distinguish: mu1 and mu2 must differ");
  require(p.sigma2 > 0.0, "mu-distinguish: sigma2 must be > 0");
  for (double rho : p.rho_values) require(rho >= 0.0 && rho < 1.0, "mu-distinguish: rho values must lie in [0,1)");
  require(p.threshold > 0.0 && p.threshold < 1.0, "mu-distinguish: threshold must lie in (0,1)");
  require(p.reps >= 100 && p.n >= 1, "mu-distinguish: too few replicates");
  return p;
}

void run_mu(const MuParams& p, Context& ctx) {
  const SetSpec set = mu_distinguishing_set(p.mu1, p.mu2);
  CsvTable table = distinguish_table();
  json reports = json::array();
  for (std::size_t i = 0; i < p.rho_values.size(); ++i) {
    const double rho = p.rho_values[i];
    const DistinguishReport rep =
        check_distinguishing(set, m1_sampler(p.mu1, p.sigma2, rho), m1_sampler(p.mu2, p.sigma2, rho), p.n, p.threshold,
                             p.threshold, DistinguishOptions{ctx.mc(p.reps), true}, ctx.root().child(i));
    const std::string tag = " @ sigma2=" + num(p.sigma2) + " rho=" + num(rho);
    add_distinguish_row(table, rep, set.name + tag);
    add_distinguish_row(table, *rep.reverse, rep.reverse->set_name + tag + " (reversed)");
    json j = rep;
    j["rho"] = rho;
    reports.push_back(j);
    ctx.check("mu-set CI below " + num(p.threshold) + " under mu1 and above under mu2 (rho=" + num(rho) + ")",
              rep.p1.ci.hi < p.threshold && rep.p2.ci.lo > p.threshold &&
                  rep.verdict.kind == VerdictKind::Distinguishing,
              detail({{"p1_ci", "[" + num(rep.p1.ci.lo) + "," + num(rep.p1.ci.hi) + "]"},
                      {"p2_ci", "[" + num(rep.p2.ci.lo) + "," + num(rep.p2.ci.hi) + "]"},
                      {"verdict", rep.verdict.label()}}));
  }
  ctx.write_csv("distinguish.csv", table);
  ctx.write_json("distinguish.json", reports);
}

// ---------------------------------------------------------------------------
// m2-components

struct M2Params {
  double mu, tau1_2, tau2_2, tau_z_max, sd_rel_tol, sd_drop_z;
  std::size_t groups, reps;
  std::vector<std::size_t> n_values;
};

M2Params parse_m2(const ExperimentConfig& c) {
  ParamReader r(c.params, "m2-components");
  M2Params p;
  p.mu = r.number("mu", 0.0);
  p.tau1_2 = r.number("tau1_2", 1.0);
  p.tau2_2 = r.number("tau2_2", 1.0);
  p.groups = r.count("groups", 2);
  p.tau_z_max = r.number("tau_z_max", 4.0);
  p.sd_rel_tol = r.number("sd_rel_tol", 0.1);
  p.sd_drop_z = r.number("sd_drop_z", 3.0);
  p.n_values = n_values_or(c, {10000, 100000});
  p.reps = reps_or(c, 2000);
  r.finish();
  require(p.tau1_2 >= 0.0 && p.tau2_2 > 0.0, "m2-components: need tau1_2 >= 0 and tau2_2 > 0");
  require(p.groups >= 1, "m2-components: need at least one group");
  require(p.reps >= 4, "m2-components: reps must be >= 4");
  for (auto n : p.n_values) require(n >= 2 * p.groups, "m2-components: n too small for the number of groups");
  return p;
}

void run_m2(const M2Params& p, Context& ctx) {
  CsvTable table({"n_total", "groups", "reps", "tau2_2_mean", "tau2_2_se", "grand_mean_sd", "grand_mean_sd_exact",
                  "grand_mean_sd_se"});
  std::vector<double> sds;
  const double log_se = 1.0 / std::sqrt(2.0 * static_cast<double>(p.reps - 1));
  for (std::size_t gi = 0; gi < p.n_values.size(); ++gi) {
    TwoLevelSpec spec{.mu = p.mu, .tau1_2 = p.tau1_2, .tau2_2 = p.tau2_2, .group_sizes = {}};
    const std::size_t n = p.n_values[gi];
    spec.group_sizes.assign(p.groups, n / p.groups);
    spec.group_sizes.front() += n % p.groups;
    std::vector<double> tau_hat(p.reps);
    std::vector<double> grand(p.reps);
    parallel_for(p.reps, ctx.threads(), [&](std::size_t r) {
      Rng rng = ctx.root().child(gi, r).engine();
      const VarCompEstimate est = var_components_m2(sample_m2(spec, rng));
      tau_hat[r] = est.tau2_2_hat;
      grand[r] = est.grand_mean;
    });
    double sum_w2 = 0.0;
    for (auto s : spec.group_sizes) sum_w2 += std::pow(static_cast<double>(s) / static_cast<double>(n), 2);
    const double sd_exact = std::sqrt(p.tau1_2 * sum_w2 + p.tau2_2 / static_cast<double>(n));
    const double sd_limit = std::sqrt(p.tau1_2 * sum_w2);
    const double tau_mean = mean(tau_hat);
    const double tau_se = std::sqrt(sample_variance(tau_hat) / static_cast<double>(p.reps));
    const double sd = std::sqrt(sample_variance(grand));
    sds.push_back(sd);
    table.row({num(n), num(p.groups), num(p.reps), num(tau_mean), num(tau_se), num(sd), num(sd_exact), num(sd * log_se)});

    ctx.check("tau2_2 estimate within " + num(p.tau_z_max) + " SE of truth at n=" + num(n),
              std::abs(tau_mean - p.tau2_2) <= p.tau_z_max * tau_se,
              detail({{"mean", num(tau_mean)}, {"se", num(tau_se)}}));
    ctx.check("grand-mean SD within " + num(100.0 * p.sd_rel_tol) + "% of sqrt(tau1_2 * sum w^2) at n=" + num(n),
              std::abs(sd - sd_limit) <= p.sd_rel_tol * sd_limit,
              detail({{"sd", num(sd)}, {"limit", num(sd_limit)}}));
    if (gi > 0) {
      const double log_ratio = std::log(sd / sds[gi - 1]);
      ctx.check("grand-mean SD does not decrease from n=" + num(p.n_values[gi - 1]) + " to n=" + num(n),
                log_ratio >= -p.sd_drop_z * std::sqrt(2.0) * log_se,
                detail({{"log_ratio", num(log_ratio)}, {"allowed", num(-p.sd_drop_z * std::sqrt(2.0) * log_se)}}));
    }
  }
  ctx.write_csv("m2_components.csv", table);
  ctx.plot("m2_components.csv", PlotSpec{.title = "grand-mean SD vs n", .x = "n_total", .y = "grand_mean_sd", .log_x = true},
           "m2_components.svg");
}

// ---------------------------------------------------------------------------
// binary-distinguish

struct BinaryParams {
  double p, m5_p, z_max;
  std::size_t n, reps, m5_horizon, m5_n, m5_reps;
};

BinaryParams parse_binary(const ExperimentConfig& c) {
  ParamReader r(c.params, "binary-distinguish");
  BinaryParams p;
  p.p = r.number("p", 0.5);
  p.n = n_values_or(c, {10}).front();
  p.reps = reps_or(c, 100000);
  p.z_max = r.number("z_max", 3.0);
  p.m5_p = r.number("m5_p", 0.25);
  p.m5_horizon = r.count("m5_horizon", 12);
  p.m5_n = r.count("m5_n", 100);
  p.m5_reps = r.count("m5_reps", 100000);
  r.finish();
  require(p.p > 0.0 && p.p < 1.0 && p.m5_p > 0.0 && p.m5_p < 1.0, "binary-distinguish: probabilities must lie in (0,1)");
  require(p.n >= 1 && p.m5_horizon >= 1, "binary-distinguish: n and m5_horizon must be >= 1");
  require(p.m5_n >= 2 && p.m5_n % 2 == 0, "binary-distinguish: m5_n must be even");
  require(p.reps >= 100 && p.m5_reps >= 100, "binary-distinguish: too few replicates");
  return p;
}

void run_binary(const BinaryParams& p, Context& ctx) {
  const SetSpec extreme{"mean in {0,1}",
                        [](std::span<const double> x) {
                          return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
                        },
                        std::nullopt};
  const SetSpec half{"mean = 1/2",
                     [](std::span<const double> x) {
                       double s = 0.0;
                       for (double v : x) s += v;
                       return 2.0 * s == static_cast<double>(x.size());
                     },
                     std::nullopt};

  const BinarySpec m3{.variant = BinaryVariant::M3, .p = p.p};
  const BinarySpec m4{.variant = BinaryVariant::M4, .p = p.p};
  const double r_oracle = solve_m5_r(p.m5_p, std::max<std::size_t>(p.m5_horizon, p.m5_n));
  const BinarySpec m5{.variant = BinaryVariant::M5, .p = p.m5_p, .r_override = r_oracle};
  const BinarySpec m3_for_m5{.variant = BinaryVariant::M3, .p = p.m5_p};

  CsvTable sets({"model", "set", "n", "reps", "p_hat", "ci_lo", "ci_hi", "exact"});
  const ProbEstimate m3_est = estimate_set_prob(binary_sampler(m3), extreme, p.n, ctx.mc(p.reps), ctx.root().child(1));
  const ProbEstimate m4_est = estimate_set_prob(binary_sampler(m4), extreme, p.n, ctx.mc(p.reps), ctx.root().child(2));
  const double exact_m3 = std::pow(p.p, static_cast<double>(p.n)) + std::pow(1.0 - p.p, static_cast<double>(p.n));
  sets.row({"M3", extreme.name, num(p.n), num(p.reps), num(m3_est.p_hat), num(m3_est.ci.lo), num(m3_est.ci.hi), num(exact_m3)});
  sets.row({"M4", extreme.name, num(p.n), num(p.reps), num(m4_est.p_hat), num(m4_est.ci.lo), num(m4_est.ci.hi), "1"});

  const double se_m3 = std::sqrt(exact_m3 * (1.0 - exact_m3) / static_cast<double>(p.reps));
  const double z_m3 = (m3_est.p_hat - exact_m3) / se_m3;
  ctx.check("M3: P(mean in {0,1}) matches p^n + (1-p)^n within " + num(p.z_max) + " SE", std::abs(z_m3) <= p.z_max,
            detail({{"p_hat", num(m3_est.p_hat)}, {"exact", num(exact_m3)}, {"z", num(z_m3)}}));
  ctx.check("M4: P(mean in {0,1}) = 1 exactly", m4_est.hits == m4_est.reps,
            detail({{"hits", num(m4_est.hits)}, {"reps", num(m4_est.reps)}}));

  // mean = 1/2 at even n: M5 puts mass r + (1 - r) P(Bin(n, q/2) = n/2) there.
  const double q = std::min(p.m5_p, 1.0 - p.m5_p);
  const double exact_m5_half = r_oracle + (1.0 - r_oracle) * binomial_pmf(p.m5_n / 2, p.m5_n, 0.5 * q);
  const double exact_m3_half = binomial_pmf(p.m5_n / 2, p.m5_n, p.m5_p);
  const ProbEstimate m5_half = estimate_set_prob(binary_sampler(m5), half, p.m5_n, ctx.mc(p.m5_reps), ctx.root().child(3));
  const ProbEstimate m3_half =
      estimate_set_prob(binary_sampler(m3_for_m5), half, p.m5_n, ctx.mc(p.m5_reps), ctx.root().child(4));
  sets.row({"M5", half.name, num(p.m5_n), num(p.m5_reps), num(m5_half.p_hat), num(m5_half.ci.lo), num(m5_half.ci.hi),
            num(exact_m5_half)});
  sets.row({"M3", half.name, num(p.m5_n), num(p.m5_reps), num(m3_half.p_hat), num(m3_half.ci.lo), num(m3_half.ci.hi),
            num(exact_m3_half)});
  ctx.write_csv("binary_sets.csv", sets);

  CsvTable dist = distinguish_table();
  DistinguishReport m3_m4;
  m3_m4.set_name = extreme.name;
  m3_m4.n = p.n;
  m3_m4.reps = p.reps;
  m3_m4.p1 = m3_est;
  m3_m4.p2 = m4_est;
  if (auto a = search_alpha_grid(m3_est, m4_est)) m3_m4.verdict = Verdict{VerdictKind::Distinguishing, *a, *a};
  add_distinguish_row(dist, m3_m4, extreme.name + " M3 vs M4");
  DistinguishReport m3_m5;
  m3_m5.set_name = half.name;
  m3_m5.n = p.m5_n;
  m3_m5.reps = p.m5_reps;
  m3_m5.p1 = m3_half;
  m3_m5.p2 = m5_half;
  if (auto a = search_alpha_grid(m3_half, m5_half)) m3_m5.verdict = Verdict{VerdictKind::Distinguishing, *a, *a};
  add_distinguish_row(dist, m3_m5, half.name + " M3 vs M5");
  ctx.write_csv("distinguish.csv", dist);

  // Per-position marginals of M5, with the solved r and with the literal closed form.
  const double r_literal = m5_r_literal(p.m5_p);
  const BinarySpec m5_literal{.variant = BinaryVariant::M5, .p = p.m5_p, .r_override = r_literal};
  std::vector<std::size_t> ones(p.m5_horizon, 0);
  std::vector<std::size_t> ones_literal(p.m5_horizon, 0);
  {
    std::vector<BitVector> draws(p.m5_reps);
    std::vector<BitVector> draws_literal(p.m5_reps);
    parallel_for(p.m5_reps, ctx.threads(), [&](std::size_t r) {
      Rng rng = ctx.root().child(5, r).engine();
      draws[r] = sample_binary(m5, p.m5_horizon, rng);
      Rng rng_lit = ctx.root().child(6, r).engine();
      draws_literal[r] = sample_binary(m5_literal, p.m5_horizon, rng_lit);
    });
    for (std::size_t r = 0; r < p.m5_reps; ++r) {
      for (std::size_t j = 0; j < p.m5_horizon; ++j) {
        ones[j] += draws[r][j];
        ones_literal[j] += draws_literal[r][j];
      }
    }
  }
  CsvTable marg({"j", "p", "r_oracle", "p_hat_oracle", "se", "z", "r_literal", "exact_literal_marginal", "p_hat_literal"});
  const double se = std::sqrt(p.m5_p * (1.0 - p.m5_p) / static_cast<double>(p.m5_reps));
  double worst_z = 0.0;
  for (std::size_t j = 0; j < p.m5_horizon; ++j) {
    const double phat = static_cast<double>(ones[j]) / static_cast<double>(p.m5_reps);
    const double phat_lit = static_cast<double>(ones_literal[j]) / static_cast<double>(p.m5_reps);
    const M5BranchMarginals b = m5_branch_marginals(p.m5_p, j + 1);
    const double exact_lit = r_literal * b.given_y1 + (1.0 - r_literal) * b.given_y0;
    const double z = (phat - p.m5_p) / se;
    worst_z = std::max(worst_z, std::abs(z));
    marg.row({num(j + 1), num(p.m5_p), num(r_oracle), num(phat), num(se), num(z), num(r_literal), num(exact_lit), num(phat_lit)});
  }
  ctx.write_csv("m5_marginals.csv", marg);
  ctx.plot("m5_marginals.csv", PlotSpec{.title = "M5 marginals P(X_j = 1)", .x = "j", .y = "p_hat_oracle", .reference_y = p.m5_p},
           "m5_marginals.svg");
  ctx.check("M5 marginals equal p within " + num(p.z_max) + " SE for j <= " + num(p.m5_horizon), worst_z <= p.z_max,
            detail({{"r", num(r_oracle)}, {"max_abs_z", num(worst_z)}}));
}

// ---------------------------------------------------------------------------
// changepoint-calibration

struct ChangepointParams {
  std::size_t length, sequences, null_reps, m_cp, power_sequences;
  double p, nominal, rate_lo, rate_hi, power_min;
  std::vector<double> q_values;
};

ChangepointParams parse_changepoint(const ExperimentConfig& c) {
  ParamReader r(c.params, "changepoint-calibration");
  ChangepointParams p;
  p.length = n_values_or(c, {200}).front();
  p.sequences = reps_or(c, 2000);
  p.null_reps = r.count("null_reps", 2000);
  p.p = r.number("p", 0.5);
  p.nominal = r.number("nominal", 0.05);
  p.rate_lo = r.number("rate_lo", 0.03);
  p.rate_hi = r.number("rate_hi", 0.07);
  p.m_cp = r.count("m_cp", 100);
  p.q_values = r.numbers("q_values", {0.0, 0.1, 0.2, 0.8, 0.9, 1.0});
  p.power_sequences = r.count("power_sequences", 500);
  p.power_min = r.number("power_min", 0.8);
  r.finish();
  require(p.p > 0.0 && p.p < 1.0, "changepoint-calibration: p must lie in (0,1)");
  require(p.length >= 4, "changepoint-calibration: length must be >= 4");
  require(p.null_reps >= kMinScanNullReps, "changepoint-calibration: null_reps must be >= 2000");
  require(p.m_cp >= 1 && p.m_cp <= p.length, "changepoint-calibration: m_cp must lie in [1, length]");
  for (double q : p.q_values) require(q >= 0.0 && q <= 1.0, "changepoint-calibration: q values must lie in [0,1]");
  require(p.sequences >= 1 && p.power_sequences >= 1, "changepoint-calibration: need sequences");
  return p;
}

void run_changepoint(const ChangepointParams& p, Context& ctx) {
  CsvTable table({"scenario", "q", "m_cp", "length", "sequences", "null_reps", "rejections", "rate", "ci_lo", "ci_hi"});

  auto rejection_rate = [&](const BinarySpec& spec, std::size_t sequences, std::uint64_t tag) {
    std::vector<std::uint8_t> rejected(sequences, 0);
    parallel_for(sequences, ctx.threads(), [&](std::size_t s) {
      Rng rng = ctx.root().child(tag, s).engine();
      const BitVector x = sample_binary(spec, p.length, rng);
      const ScanResult res = changepoint_scan(x, p.null_reps, ctx.root().child(tag + 1000, s));
      rejected[s] = res.p_value <= p.nominal ? 1 : 0;
    });
    return static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), std::uint8_t{1}));
  };

  const BinarySpec null_spec{.variant = BinaryVariant::M3, .p = p.p};
  const std::size_t null_rej = rejection_rate(null_spec, p.sequences, 1);
  const double rate = static_cast<double>(null_rej) / static_cast<double>(p.sequences);
  const Interval ci = clopper_pearson(null_rej, p.sequences, ctx.level());
  table.row({"null", num(p.p), "1", num(p.length), num(p.sequences), num(p.null_reps), num(null_rej), num(rate),
             num(ci.lo), num(ci.hi)});
  ctx.check("type-I rate at nominal " + num(p.nominal) + " within [" + num(p.rate_lo) + ", " + num(p.rate_hi) + "]",
            rate >= p.rate_lo && rate <= p.rate_hi, detail({{"rate", num(rate)}, {"rejections", num(null_rej)}}));

  double worst_power = 1.0;
  std::string worst_q;
  for (std::size_t qi = 0; qi < p.q_values.size(); ++qi) {
    const double q = p.q_values[qi];
    const BinarySpec alt{.variant = BinaryVariant::ChangePoint, .p = p.p, .m_cp = p.m_cp, .q_fixed = q};
    const std::size_t rej = rejection_rate(alt, p.power_sequences, 10 + qi);
    const double power = static_cast<double>(rej) / static_cast<double>(p.power_sequences);
    const Interval pci = clopper_pearson(rej, p.power_sequences, ctx.level());
    table.row({"change", num(q), num(p.m_cp), num(p.length), num(p.power_sequences), num(p.null_reps), num(rej),
               num(power), num(pci.lo), num(pci.hi)});
    if (std::abs(q - p.p) >= 0.3 - 1e-12 && power < worst_power) {
      worst_power = power;
      worst_q = num(q);
    }
  }
  ctx.write_csv("changepoint.csv", table);
  ctx.plot("changepoint.csv",
           PlotSpec{.title = "scan test rejection rate", .x = "q", .y = "rate", .y_lo = "ci_lo", .y_hi = "ci_hi",
                    .group = "scenario", .reference_y = p.nominal},
           "changepoint.svg");
  ctx.check("power >= " + num(p.power_min) + " for every |q - p| >= 0.3 at m_cp=" + num(p.m_cp),
            worst_power >= p.power_min, detail({{"min_power", num(worst_power)}, {"at_q", worst_q}}));
}

// ---------------------------------------------------------------------------
// kmeans-consistency

struct KmeansParams {
  std::vector<double> mixture_means, mixture_weights, gaussian_centers;
  double mixture_sd, gaussian_sigma2, frac_min;
  std::size_t approx_budget, mixture_restarts, lloyd_restarts, reps, toy_datasets, toy_restarts, toy_min_equal;
  std::vector<std::size_t> n_values;
};

KmeansParams parse_kmeans(const ExperimentConfig& c) {
  ParamReader r(c.params, "kmeans-consistency");
  KmeansParams p;
  p.mixture_means = r.numbers("mixture_means", {-1.5, 1.5});
  p.mixture_weights = r.numbers("mixture_weights", {0.5, 0.5});
  p.mixture_sd = r.number("mixture_sd", 1.0);
  p.approx_budget = r.count("approx_budget", 200000);
  p.mixture_restarts = r.count("mixture_restarts", 8);
  p.gaussian_centers = r.numbers("gaussian_centers", {0.0, 2.0});
  p.gaussian_sigma2 = r.number("gaussian_sigma2", 1.0);
  p.lloyd_restarts = r.count("lloyd_restarts", 4);
  p.frac_min = r.number("frac_min", 0.99);
  p.toy_datasets = r.count("toy_datasets", 100);
  p.toy_restarts = r.count("toy_restarts", 32);
  p.toy_min_equal = r.count("toy_min_equal", 99);
  p.n_values = n_values_or(c, {50, 200, 1000, 5000});
  p.reps = reps_or(c, 1000);
  r.finish();
  require(p.mixture_means.size() == p.mixture_weights.size() && p.mixture_means.size() >= 2,
          "kmeans-consistency: need matching mixture means/weights (at least two)");
  require(p.mixture_sd > 0.0 && p.gaussian_sigma2 > 0.0, "kmeans-consistency: spreads must be > 0");
  require(p.gaussian_centers.size() == 2 && p.gaussian_centers[0] < p.gaussian_centers[1],
          "kmeans-consistency: gaussian_centers must be two increasing values");
  require(p.lloyd_restarts >= 1 && p.toy_restarts >= 1 && p.mixture_restarts >= 1, "kmeans-consistency: restarts >= 1");
  require(p.reps >= 1, "kmeans-consistency: reps must be >= 1");
  require(p.approx_budget >= 10 * p.mixture_means.size(), "kmeans-consistency: approx_budget must be >= 10 k");
  require(std::is_sorted(p.n_values.begin(), p.n_values.end()) && p.n_values.front() >= 2,
          "kmeans-consistency: n values must be increasing and >= 2");
  return p;
}

void write_consistency(Context& ctx, const std::string& name, const ConsistencyTable& t) {
  CsvTable csv({"n", "reps", "frac_correct", "ci_lo", "ci_hi"});
  for (const auto& row : t) csv.row({num(row.n), num(row.reps), num(row.frac_correct), num(row.ci.lo), num(row.ci.hi)});
  ctx.write_csv(name + ".csv", csv);
  ctx.plot(name + ".csv",
           PlotSpec{.title = "fraction with correct membership (" + name + ")", .x = "n", .y = "frac_correct",
                    .y_lo = "ci_lo", .y_hi = "ci_hi", .log_x = true},
           name + ".svg");
}

void run_kmeans(const KmeansParams& p, Context& ctx) {
  const std::size_t max_n = p.n_values.back();
  ConsistencyOptions copts;
  copts.reps = p.reps;
  copts.level = ctx.level();
  copts.lloyd.restarts = p.lloyd_restarts;
  copts.threads = ctx.threads();

  // (a) fixed classification model associated to a mixture
  Rng mix_rng = ctx.root().child(1).engine();
  AssociatedMixtureOptions mopts;
  mopts.approx_budget = p.approx_budget;
  mopts.restarts = p.mixture_restarts;
  mopts.n_labels = max_n;
  const MixtureFixedClassSpec mixture =
      associated_mixture(gaussian_mixture_1d(p.mixture_means, p.mixture_weights, p.mixture_sd), 1,
                         p.mixture_means.size(), mopts, mix_rng);
  const ConsistencyTable mix_table = membership_consistency_experiment(mixture, p.n_values, copts, ctx.root().child(2));
  write_consistency(ctx, "consistency_mixture", mix_table);
  ctx.write_json("mixture_spec.json", json{{"pop_centers", matrix_to_json(mixture.pop_centers)},
                                           {"proportions", mixture.proportions},
                                           {"boundary_mass", mixture.boundary_mass},
                                           {"reference_size", mixture.reference_size},
                                           {"true_label_first", mixture.labels.front()}});
  ctx.check("associated mixture: equidistant boundary has zero mass", mixture.boundary_mass == 0.0,
            detail({{"boundary_mass", num(mixture.boundary_mass)}}));
  ctx.check("associated mixture: correct-membership fraction >= " + num(p.frac_min) + " at n=" + num(max_n),
            mix_table.back().frac_correct >= p.frac_min,
            detail({{"fractions", [&] {
                       std::string s;
                       for (const auto& r : mix_table) s += (s.empty() ? "" : "/") + num(r.frac_correct);
                       return s;
                     }()}}));

  // (b) Gaussian fixed classification model
  FixedClassSpec gauss;
  gauss.centers = Eigen::MatrixXd(2, 1);
  gauss.centers << p.gaussian_centers[0], p.gaussian_centers[1];
  gauss.sigma2 = p.gaussian_sigma2;
  gauss.labels.resize(max_n);
  for (std::size_t i = 0; i < max_n; ++i) gauss.labels[i] = i % 2;
  const ConsistencyTable g_table = membership_consistency_experiment(gauss, p.n_values, copts, ctx.root().child(3));
  write_consistency(ctx, "consistency_gaussian", g_table);
  const double floor = misclassification_floor(p.gaussian_centers[1] - p.gaussian_centers[0], std::sqrt(p.gaussian_sigma2));
  const ConsistencyRow& last = g_table.back();
  ctx.check("Gaussian fixed-class: CI at n=" + num(max_n) + " contains 1 - floor and excludes 1",
            last.ci.contains(1.0 - floor) && last.ci.hi < 1.0,
            detail({{"frac", num(last.frac_correct)}, {"ci", "[" + num(last.ci.lo) + "," + num(last.ci.hi) + "]"},
                    {"target", num(1.0 - floor)}}));

  // (c) Lloyd against exhaustive search on toy data
  CsvTable toy({"dataset", "n", "p", "k", "lloyd_objective", "brute_objective", "equal"});
  std::size_t equal = 0;
  bool below_optimum = false;
  json fits = json::array();
  for (std::size_t d = 0; d < p.toy_datasets; ++d) {
    Rng rng = ctx.root().child(4, d).engine();
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(std::max<std::size_t>(k, 3), 10)(rng);
    Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      for (Eigen::Index c = 0; c < data.cols(); ++c) data(i, c) = draw_normal(rng);
    Rng lloyd_rng = ctx.root().child(5, d).engine();
    const KMeansFit fit = lloyd(data, k, LloydOptions{.restarts = p.toy_restarts}, lloyd_rng);
    const KMeansFit exact = brute_force_kmeans(data, k);
    const bool same = fit.objective <= exact.objective * (1.0 + 1e-9) + 1e-300;
    below_optimum = below_optimum || fit.objective < exact.objective * (1.0 - 1e-9);
    equal += same ? 1 : 0;
    toy.row({num(d), num(n), num(dim), num(k), num(fit.objective), num(exact.objective), same ? "1" : "0"});
    if (d < 3) fits.push_back(json{{"dataset", d}, {"data", matrix_to_json(data)}, {"lloyd", fit}, {"brute_force", exact}});
  }
  ctx.write_csv("kmeans_toy.csv", toy);
  ctx.write_json("toy_fits.json", fits);
  ctx.check("Lloyd matches exhaustive search on >= " + num(p.toy_min_equal) + "/" + num(p.toy_datasets) + " toy datasets",
            equal >= p.toy_min_equal && !below_optimum,
            detail({{"equal", num(equal)}, {"below_optimum", below_optimum ? "yes" : "no"}}));
}

// ---------------------------------------------------------------------------

using Runner = std::function<void(Context&)>;

Runner make_runner(const ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentKind::ConditionalGivenMean: return [p = parse_conditional_law(c)](Context& ctx) { run_conditional_law(p, ctx); };
    case ExperimentKind::MeanVariance: return [p = parse_mean_variance(c)](Context& ctx) { run_mean_variance(p, ctx); };
    case ExperimentKind::MatchedPair: return [p = parse_matched_pair(c)](Context& ctx) { run_matched_pair(p, ctx); };
    case ExperimentKind::RhoNonconsistency: return [p = parse_rho(c)](Context& ctx) { run_rho(p, ctx); };
    case ExperimentKind::MuDistinguish: return [p = parse_mu(c)](Context& ctx) { run_mu(p, ctx); };
    case ExperimentKind::M2Components: return [p = parse_m2(c)](Context& ctx) { run_m2(p, ctx); };
    case ExperimentKind::BinaryDistinguish: return [p = parse_binary(c)](Context& ctx) { run_binary(p, ctx); };
    case ExperimentKind::ChangepointCalibration: return [p = parse_changepoint(c)](Context& ctx) { run_changepoint(p, ctx); };
    case ExperimentKind::KmeansConsistency: return [p = parse_kmeans(c)](Context& ctx) { run_kmeans(p, ctx); };
  }
  config_error("unknown experiment");
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == kind) return name;
  }
  return "?";
}

ExperimentKind experiment_from_string(std::string_view name) {
  for (const auto& [k, n] : kExperimentNames) {
    if (n == name) return k;
  }
  config_error("unknown experiment '" + std::string(name) + "'");
}

const std::vector<ExperimentKind>& all_experiments() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> v;
    for (const auto& [k, n] : kExperimentNames) v.push_back(k);
    return v;
  }();
  return kinds;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) config_error("config must be a JSON object");
  static const std::set<std::string> kKeys = {"experiment", "seed", "reps", "n_values", "ci_level", "output_dir", "params"};
  for (const auto& item : doc.items()) {
    if (!kKeys.contains(item.key())) config_error("unknown config field '" + item.key() + "'");
  }
  ExperimentConfig c;
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) config_error("'experiment' (string) is required");
  c.experiment = experiment_from_string(doc["experiment"].get<std::string>());
  if (!doc.contains("seed") || !is_count(doc["seed"])) {
    config_error("'seed' (non-negative integer) is required");
  }
  c.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("reps")) {
    if (!is_count(doc["reps"])) config_error("'reps' must be a non-negative integer");
    c.reps = doc["reps"].get<std::size_t>();
  }
  if (doc.contains("n_values")) {
    if (!doc["n_values"].is_array()) config_error("'n_values' must be an array");
    for (const auto& v : doc["n_values"]) {
      if (!is_count(v)) config_error("'n_values' must hold non-negative integers");
      c.n_values.push_back(v.get<std::size_t>());
    }
  }
  if (doc.contains("ci_level")) {
    if (!doc["ci_level"].is_number()) config_error("'ci_level' must be a number");
    c.ci_level = doc["ci_level"].get<double>();
    if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) config_error("'ci_level' must lie in (0,1)");
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) config_error("'output_dir' must be a string");
    c.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) config_error("'params' must be an object");
    c.params = doc["params"];
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) config_error("cannot open config " + path.string());
  json doc;
  try {
    f >> doc;
  } catch (const json::exception& e) {
    config_error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const ExperimentConfig& c) {
  return json{{"experiment", std::string(to_string(c.experiment))},
              {"seed", c.seed},
              {"reps", c.reps},
              {"n_values", c.n_values},
              {"ci_level", c.ci_level},
              {"output_dir", c.output_dir},
              {"params", c.params}};
}

void validate_config(const ExperimentConfig& config) {
  try {
    (void)make_runner(config);
  } catch (const json::exception& e) {
    config_error(std::string("bad parameter value: ") + e.what());
  }
}

bool RunManifest::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

json manifest_to_json(const RunManifest& m) {
  json files = json::array();
  for (const auto& f : m.files) files.push_back(json{{"name", f.name}, {"checksum", f.checksum}});
  json checks = json::array();
  for (const auto& c : m.checks) checks.push_back(json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return json{{"experiment", m.experiment}, {"config_hash", m.config_hash}, {"version", m.version},
              {"seed", m.seed},             {"threads", m.threads},         {"files", files},
              {"checks", checks},           {"passed", m.passed()},         {"wall_time_s", m.wall_time_s}};
}

RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Runner runner;
  try {
    runner = make_runner(config);
  } catch (const json::exception& e) {
    config_error(std::string("bad parameter value: ") + e.what());
  }

  const fs::path out = options.out_dir ? *options.out_dir : fs::path(config.output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "cannot create output directory " + out.string() + ": " + ec.message());

  RunManifest manifest;
  manifest.experiment = std::string(to_string(config.experiment));
  manifest.config_hash = "fnv1a64:" + hex64(fnv1a64(config_to_json(config).dump()));
  manifest.version = std::string(library_version());
  manifest.seed = config.seed;
  manifest.threads = resolve_threads(options.threads);

  Context ctx(config, options, out, manifest);
  try {
    runner(ctx);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid || e.code() == ErrorCode::CheckFailed) throw;
    throw Error(ErrorCode::NumericalFailure, e.what());
  }

  manifest.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream f(out / "manifest.json", std::ios::binary);
  f << manifest_to_json(manifest).dump(2) << '\n';
  return manifest;
}

std::string csv_schema_help() {
  return R"(CSV outputs per experiment (columns are stable across runs):
  verify-lemma1            conditional_law.csv: n,rho,sigma2,xbar,max_mean_dev,max_cov_dev,mu_shift_dev,max_row_sum
  mean-variance            mean_variance.csv: n,rho,sigma2,reps,var_hat,se,exact,z
  matched-pair             ks.csv: comparison,rho1,sigma1_2,rho2,sigma2_2,residual_var1,residual_var2,n,reps,ks_statistic,p_value,rejected
                           power_curve.csv: mu,p1_hat,p1_lo,p1_hi,p2_hat,p2_lo,p2_hi,diff,diff_se
                           power_integral.csv: set,n,reps,integral,integral_se,max_abs_z
  rho-nonconsistency       rho_iqr.csv: design,n,sequences,reps,q25,median,q75,iqr
  mu-distinguish           distinguish.csv: set,n,reps,p1_hat,p1_lo,p1_hi,p2_hat,p2_lo,p2_hi,verdict
  m2-components            m2_components.csv: n_total,groups,reps,tau2_2_mean,tau2_2_se,grand_mean_sd,grand_mean_sd_exact,grand_mean_sd_se
  binary-distinguish       binary_sets.csv: model,set,n,reps,p_hat,ci_lo,ci_hi,exact
                           distinguish.csv: set,n,reps,p1_hat,p1_lo,p1_hi,p2_hat,p2_lo,p2_hi,verdict
                           m5_marginals.csv: j,p,r_oracle,p_hat_oracle,se,z,r_literal,exact_literal_marginal,p_hat_literal
  changepoint-calibration  changepoint.csv: scenario,q,m_cp,length,sequences,null_reps,rejections,rate,ci_lo,ci_hi
  kmeans-consistency       consistency_mixture.csv, consistency_gaussian.csv: n,reps,frac_correct,ci_lo,ci_hi
                           kmeans_toy.csv: dataset,n,p,k,lloyd_objective,brute_objective,equal
Every run also writes manifest.json (config hash, version, file checksums, checks, wall time).
)";
}

}  // namespace identlab
