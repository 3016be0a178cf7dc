#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "identlab/error.hpp"
#include "identlab/models.hpp"
#include "identlab/rng.hpp"
#include "identlab/stats.hpp"
#include "oracles.hpp"

using namespace identlab;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected identlab::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("sample_m1 with rho = 0 is i.i.d. normal") {
  const EquicorrSpec spec{.n = 5, .mu = 1.0, .sigma2 = 4.0, .rho = 0.0};
  const Stream s(21);
  std::vector<double> first(10000);
  std::vector<double> reference(10000);
  for (std::size_t i = 0; i < first.size(); ++i) {
    Rng rng = s.child(1, i).engine();
    first[i] = sample_m1(spec, rng)[0];
    Rng rng2 = s.child(2, i).engine();
    reference[i] = 1.0 + 2.0 * draw_normal(rng2);
  }
  CHECK(ks_two_sample(first, reference).p_value >= 0.001);
}

TEST_CASE("sample_m1 pairwise covariance") {
  const EquicorrSpec spec{.n = 4, .mu = 0.0, .sigma2 = 2.0, .rho = 0.6};
  const Stream s(22);
  const std::size_t reps = 50000;
  double cross = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    Rng rng = s.child(i).engine();
    const auto x = sample_m1(spec, rng);
    cross += x[1] * x[3];
  }
  // Var(X1 X3) = s^4 (1 + rho^2) for jointly normal with zero mean.
  const double se = std::sqrt(4.0 * (1 + 0.36) / reps);
  CHECK(std::abs(cross / reps - 1.2) < 4.0 * se);
}

TEST_CASE("matched_pair") {
  CHECK(matched_pair(0.2, 0.6, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(matched_pair(0.4, 0.4, 3.3) == doctest::Approx(3.3).epsilon(1e-14));
  CHECK(matched_pair(0.0, 0.5, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(code_of([] { matched_pair(0.2, 1.0, 1.0); }) == ErrorCode::InvalidRho);
}

TEST_CASE("sample_m2 with tau1_2 = 0 has a common mean and within variance") {
  TwoLevelSpec spec{.mu = 3.0, .tau1_2 = 0.0, .tau2_2 = 2.0, .group_sizes = {4000, 6000}};
  Rng rng = Stream(31).engine();
  const auto groups = sample_m2(spec, rng);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].size() == 4000);
  CHECK(groups[1].size() == 6000);
  std::vector<double> all(groups[0]);
  all.insert(all.end(), groups[1].begin(), groups[1].end());
  CHECK(std::abs(mean(all) - 3.0) < 4.0 * std::sqrt(2.0 / 10000));
  CHECK(std::abs(sample_variance(all) - 2.0) < 4.0 * 2.0 * std::sqrt(2.0 / 10000));
}

TEST_CASE("binary M4 is constant with P(all ones) = p") {
  const BinarySpec spec{.variant = BinaryVariant::M4, .p = 0.3};
  const Stream s(41);
  const std::size_t reps = 100000;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    Rng rng = s.child(i).engine();
    const BitVector x = sample_binary(spec, 20, rng);
    bool constant = true;
    for (auto b : x) constant = constant && b == x[0];
    REQUIRE(constant);
    ones += x[0];
  }
  CHECK(std::abs(static_cast<double>(ones) / reps - 0.3) < 3.0 * std::sqrt(0.21 / reps));
}

TEST_CASE("change point with m_cp = 1 is M3, draw for draw") {
  const BinarySpec m3{.variant = BinaryVariant::M3, .p = 0.35};
  const BinarySpec cp{.variant = BinaryVariant::ChangePoint, .p = 0.35, .m_cp = 1};
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng a = Stream(i).engine();
    Rng b = Stream(i).engine();
    CHECK(sample_binary(m3, 30, a) == sample_binary(cp, 30, b));
  }
}

TEST_CASE("binary validation") {
  Rng rng = Stream(1).engine();
  CHECK(code_of([&] { sample_binary({.variant = BinaryVariant::M3, .p = 1.5}, 3, rng); }) == ErrorCode::InvalidP);
  CHECK(code_of([&] { sample_binary({.variant = BinaryVariant::M3, .p = -0.1}, 3, rng); }) == ErrorCode::InvalidP);
}

TEST_CASE("M5 mixing probability") {
  CHECK(solve_m5_r(1.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m5_r_literal(1.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(solve_m5_r(0.25) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(solve_m5_r(1e-9) < 1e-8);
  // reflection: p and 1 - p share r
  CHECK(solve_m5_r(0.75) == doctest::Approx(solve_m5_r(0.25)).epsilon(1e-12));
}

TEST_CASE("M5 marginals against exhaustive enumeration") {
  for (double p : {0.1, 0.25, 1.0 / 3.0, 0.5}) {
    const double r = solve_m5_r(p, 12);
    const std::vector<double> m = oracle::m5_marginals(12, p, r);
    for (std::size_t j = 0; j < m.size(); ++j) CHECK(m[j] == doctest::Approx(p).epsilon(1e-12));
    // the pmf sums to one
    double total = 0.0;
    std::vector<int> x(6);
    for (unsigned code = 0; code < 64; ++code) {
      for (int i = 0; i < 6; ++i) x[i] = (code >> i) & 1U;
      total += oracle::m5_pmf(x, p, r);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  // the literal mixing weight misses p at p = 0.25
  const std::vector<double> lit = oracle::m5_marginals(4, 0.25, m5_r_literal(0.25));
  CHECK(std::abs(lit[0] - 0.25) > 0.01);
}

TEST_CASE("M5 sampler matches the enumerated pmf on length-4 patterns") {
  const double p = 0.25;
  const double r = solve_m5_r(p);
  const BinarySpec spec{.variant = BinaryVariant::M5, .p = p};
  const Stream s(51);
  const std::size_t reps = 200000;
  std::map<unsigned, std::size_t> counts;
  for (std::size_t i = 0; i < reps; ++i) {
    Rng rng = s.child(i).engine();
    const BitVector x = sample_binary(spec, 4, rng);
    unsigned code = 0;
    for (int j = 0; j < 4; ++j) code |= static_cast<unsigned>(x[j]) << j;
    ++counts[code];
  }
  std::vector<int> x(4);
  for (unsigned code = 0; code < 16; ++code) {
    for (int j = 0; j < 4; ++j) x[j] = (code >> j) & 1U;
    const double prob = oracle::m5_pmf(x, p, r);
    const double se = std::sqrt(prob * (1 - prob) / reps);
    CHECK(std::abs(static_cast<double>(counts[code]) / reps - prob) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("M5 even-length sequences of the hidden alternating branch have mean 1/2") {
  const BinarySpec spec{.variant = BinaryVariant::M5, .p = 0.25, .r_override = 1.0};
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng = Stream(i).engine();
    const BitVector x = sample_binary(spec, 10, rng);
    int s = 0;
    for (auto b : x) s += b;
    CHECK(s == 5);
  }
}

TEST_CASE("fixed classification sampler") {
  FixedClassSpec spec;
  spec.centers = Eigen::MatrixXd(2, 1);
  spec.centers << 0.0, 2.0;
  spec.sigma2 = 0.0;
  spec.labels = {0, 1, 1, 0};
  Rng rng = Stream(61).engine();
  const Eigen::MatrixXd exact = sample_fixed_class(spec, rng);
  for (int i = 0; i < 4; ++i) CHECK(exact(i, 0) == spec.centers(static_cast<Eigen::Index>(spec.labels[i]), 0));

  spec.sigma2 = 1.0;
  spec.labels.resize(20000);
  for (std::size_t i = 0; i < spec.labels.size(); ++i) spec.labels[i] = i % 2;
  const Eigen::MatrixXd x = sample_fixed_class(spec, rng);
  double sum0 = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); i += 2) sum0 += x(i, 0);
  CHECK(std::abs(sum0 / 10000.0) < 3.0 * std::sqrt(1.0 / 10000.0));
}

TEST_CASE("fixed classification validation") {
  FixedClassSpec spec;
  spec.centers = Eigen::MatrixXd(2, 1);
  spec.centers << 2.0, 0.0;  // not lexicographically increasing
  spec.labels = {0, 1};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.centers << 0.0, 2.0;
  spec.labels = {0, 2};
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("associated mixture of two well separated normals") {
  AssociatedMixtureOptions opts;
  opts.approx_budget = 400000;
  opts.n_labels = 100;
  Rng rng = Stream(71).engine();
  const MixtureFixedClassSpec spec = associated_mixture(gaussian_mixture_1d({-3.0, 3.0}, {0.5, 0.5}, 1.0), 1, 2, opts, rng);
  const double c = oracle::symmetric_mixture_center(3.0);
  CHECK(c == doctest::Approx(3.0008).epsilon(1e-4));
  // Cell mean MC error is ~ 1 / sqrt(budget / 2).
  CHECK(std::abs(spec.pop_centers(0, 0) + c) < 0.01);
  CHECK(std::abs(spec.pop_centers(1, 0) - c) < 0.01);
  CHECK(std::abs(spec.proportions[0] - 0.5) < 0.01);
  CHECK(spec.boundary_mass == 0.0);
  CHECK(spec.labels.size() == 100);

  // draws from a cell stay in that cell
  for (int i = 0; i < 200; ++i) {
    CHECK(sample_cell(spec, 0, rng)(0) < 0.0);
    CHECK(sample_cell(spec, 1, rng)(0) > 0.0);
  }
}

TEST_CASE("associated mixture of a two-point base") {
  AssociatedMixtureOptions opts;
  opts.approx_budget = 20000;
  Rng rng = Stream(72).engine();
  const MixtureFixedClassSpec spec = associated_mixture(two_point_1d(-1.0, 1.0), 1, 2, opts, rng);
  CHECK(spec.pop_centers(0, 0) == -1.0);
  CHECK(spec.pop_centers(1, 0) == 1.0);
  CHECK(std::abs(spec.proportions[0] - 0.5) < 0.02);
}

TEST_CASE("associated mixture rejects starved cells") {
  AssociatedMixtureOptions opts;
  opts.approx_budget = 1000;
  Rng rng = Stream(73).engine();
  // one atom carries almost no mass, so its cell gets < 10 reference points
  PointSampler lopsided = [](Rng& g) {
    Eigen::VectorXd v(1);
    v(0) = draw_uniform(g) < 0.005 ? 50.0 : draw_normal(g);
    return v;
  };
  CHECK(code_of([&] { associated_mixture(lopsided, 1, 2, opts, rng); }) == ErrorCode::DegenerateBase);
}
