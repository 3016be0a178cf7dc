#include <algorithm>

#include "identlab/error.hpp"
#include "identlab/harness.hpp"

namespace identlab {

using nlohmann::json;

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      {"verify-lemma1", "closed-form conditional law given the sample mean vs Schur conditioning",
       json{{"experiment", "verify-lemma1"},
            {"seed", 1},
            {"n_values", {2, 5, 25, 200}},
            {"params", {{"rho_values", {0.0, 0.3, 0.9}}, {"xbar", 0.7}, {"mu", 0.0}, {"mu_alt", 7.0}}}}},
      {"mean-variance", "Monte Carlo variance of the sample mean against the exact law",
       json{{"experiment", "mean-variance"},
            {"seed", 2},
            {"reps", 100000},
            {"n_values", {10, 10000}},
            {"params", {{"sigma2", 1.0}, {"rho", 0.5}}}}},
      {"matched-pair", "residual law equality for a matched pair and the zero-integral identity",
       json{{"experiment", "matched-pair"},
            {"seed", 3},
            {"reps", 10000},
            {"n_values", {100}},
            {"params", {{"rho1", 0.2}, {"sigma1_2", 1.0}, {"rho2", 0.6}, {"curve_n", 50}, {"curve_reps", 10000}}}}},
      {"rho-nonconsistency", "spread of the rho estimate from one sequence vs pooled replicates",
       json{{"experiment", "rho-nonconsistency"},
            {"seed", 4},
            {"reps", 10000},
            {"n_values", {100, 10000}},
            {"params", {{"rho", 0.5}, {"seq_len", 10}, {"seq_counts", {100, 10000}}, {"pooled_reps", 1000}}}}},
      {"mu-distinguish", "distinguishing the mean of equicorrelated Gaussians",
       json{{"experiment", "mu-distinguish"},
            {"seed", 5},
            {"reps", 100000},
            {"n_values", {20}},
            {"params", {{"mu1", 0.0}, {"mu2", 1.0}, {"rho_values", {0.0, 0.5, 0.9}}}}}},
      {"m2-components", "two-level variance components: within-group variance vs grand mean",
       json{{"experiment", "m2-components"},
            {"seed", 6},
            {"reps", 2000},
            {"n_values", {10000, 100000}},
            {"params", {{"tau1_2", 1.0}, {"tau2_2", 1.0}, {"groups", 2}}}}},
      {"binary-distinguish", "sets of binary sequences separating exchangeable models",
       json{{"experiment", "binary-distinguish"},
            {"seed", 7},
            {"reps", 100000},
            {"n_values", {10}},
            {"params", {{"p", 0.5}, {"m5_p", 0.25}, {"m5_horizon", 12}, {"m5_n", 100}, {"m5_reps", 100000}}}}},
      {"changepoint-calibration", "size and power of the permutation scan test for a change point",
       json{{"experiment", "changepoint-calibration"},
            {"seed", 8},
            {"reps", 2000},
            {"n_values", {200}},
            {"params", {{"p", 0.5}, {"null_reps", 2000}, {"m_cp", 100}, {"power_sequences", 500}}}}},
      {"kmeans-consistency", "k-means membership recovery under fixed classification models",
       json{{"experiment", "kmeans-consistency"},
            {"seed", 9},
            {"reps", 1000},
            {"n_values", {50, 200, 1000, 5000}},
            {"params", {{"mixture_means", {-1.5, 1.5}}, {"gaussian_centers", {0.0, 2.0}}, {"toy_datasets", 100}}}}},
  };
  return all;
}

const Preset& find_preset(std::string_view name) {
  const auto& all = presets();
  auto it = std::find_if(all.begin(), all.end(), [&](const Preset& p) { return p.name == name; });
  if (it == all.end()) throw Error(ErrorCode::ConfigInvalid, "unknown preset '" + std::string(name) + "'");
  return *it;
}

}  // namespace identlab
