#include <doctest.h>

#include <cmath>
#include <vector>

#include "identlab/error.hpp"
#include "identlab/estimators.hpp"
#include "identlab/models.hpp"
#include "identlab/rng.hpp"
#include "identlab/stats.hpp"
#include "oracles.hpp"

using namespace identlab;

TEST_CASE("rho MLE matches numerical likelihood maximisation") {
  for (const std::vector<double>& x : {std::vector<double>{-1, 0, 1, 4}, std::vector<double>{3, 4, 5, 6},
                                       std::vector<double>{0.3, -1.2, 2.2, 0.9, 1.7, 0.4}}) {
    const double expected = oracle::rho_mle_numeric(x, 0.0);
    CHECK(rho_mle_known_mu(x, 0.0).rho_hat == doctest::Approx(expected).epsilon(1e-6));
  }
  // interior optimum, not a clip
  CHECK(rho_mle_known_mu(std::vector<double>{3, 4, 5, 6}, 0.0).rho_hat > 0.5);
}

TEST_CASE("rho MLE boundary and errors") {
  const RhoEstimate e = rho_mle_known_mu(std::vector<double>{-1, 1, -2, 2}, 0.0);
  CHECK(e.lambda1_hat == 0.0);
  CHECK(e.rho_hat == 0.0);
  CHECK_THROWS_AS(rho_mle_known_mu(std::vector<double>{2, 2, 2}, 2.0), Error);
  try {
    rho_mle_known_mu(std::vector<double>{2, 2, 2}, 2.0);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::DegenerateSample);
  }
  // all equal but away from mu: the shared effect explains everything
  CHECK(rho_mle_known_mu(std::vector<double>{1, 1, 1}, 0.0).rho_hat == doctest::Approx(kRhoClipMax));
}

TEST_CASE("pooled rho estimate concentrates on the truth") {
  const EquicorrSpec spec{.n = 10, .mu = 0, .sigma2 = 1, .rho = 0.5};
  Rng rng = Stream(8).engine();
  std::vector<std::vector<double>> seqs(20000);
  for (auto& s : seqs) s = sample_m1(spec, rng);
  CHECK(std::abs(rho_pooled_known_mu(seqs, 0.0).rho_hat - 0.5) < 0.02);
}

TEST_CASE("variance components") {
  const VarCompEstimate one = var_components_m2({{0.0, 2.0}});
  CHECK(one.tau2_2_hat == doctest::Approx(2.0));
  CHECK(one.grand_mean == doctest::Approx(1.0));
  CHECK_THROWS_AS(var_components_m2({{1.0}, {2.0}}), Error);

  const VarCompEstimate two = var_components_m2({{1, 3}, {10, 12, 14}});
  // within SS = 2 + 8 = 10 on 5 - 2 = 3 degrees of freedom
  CHECK(two.tau2_2_hat == doctest::Approx(10.0 / 3.0));
  CHECK(two.grand_mean == doctest::Approx(40.0 / 5.0));
  REQUIRE(two.group_means.size() == 2);
  CHECK(two.group_means[1] == doctest::Approx(12.0));
}

TEST_CASE("within-group variance is consistent under M2") {
  TwoLevelSpec spec{.mu = 0, .tau1_2 = 1, .tau2_2 = 1, .group_sizes = {5000, 5000}};
  const Stream s(9);
  std::vector<double> est(200);
  for (std::size_t r = 0; r < est.size(); ++r) {
    Rng rng = s.child(r).engine();
    est[r] = var_components_m2(sample_m2(spec, rng)).tau2_2_hat;
  }
  const double se = std::sqrt(sample_variance(est) / est.size());
  CHECK(std::abs(mean(est) - 1.0) < 4.0 * se);
}

TEST_CASE("scan statistic agrees with the reference implementation") {
  const BitVector x{0, 0, 0, 0, 1, 1, 1, 1};
  const ScanResult r = scan_statistic(x);
  CHECK(r.split_index == 4);
  CHECK(r.statistic == doctest::Approx(oracle::scan_statistic({0, 0, 0, 0, 1, 1, 1, 1})).epsilon(1e-14));
  Rng rng = Stream(3).engine();
  for (int t = 0; t < 200; ++t) {
    BitVector b(13);
    std::vector<int> v(13);
    for (std::size_t i = 0; i < b.size(); ++i) v[i] = b[i] = draw_bernoulli(rng, 0.4) ? 1 : 0;
    CHECK(scan_statistic(b).statistic == doctest::Approx(oracle::scan_statistic(v)).epsilon(1e-12));
  }
}

TEST_CASE("scan p-value matches the exact tail probability") {
  const BitVector x{0, 0, 0, 0, 1, 1, 1, 1};
  const ScanResult r = changepoint_scan(x, 20000, Stream(4));
  const double exact = oracle::scan_tail_probability(8, 0.5, r.statistic);
  CHECK(r.p_value < 0.1);
  CHECK(std::abs(r.p_value - exact) < 4.0 * std::sqrt(exact * (1 - exact) / 20000));
}

TEST_CASE("scan on constant input and argument checks") {
  CHECK(changepoint_scan(BitVector(10, 1), 2000, Stream(1)).p_value == 1.0);
  CHECK(changepoint_scan(BitVector(10, 0), 2000, Stream(1)).p_value == 1.0);
  CHECK_THROWS_AS(changepoint_scan(BitVector{0, 1, 0}, 2000, Stream(1)), Error);
  CHECK_THROWS_AS(changepoint_scan(BitVector{0, 1, 0, 1}, 100, Stream(1)), Error);
}
