#include <doctest.h>

#include <cmath>
#include <vector>

#include "identlab/error.hpp"
#include "identlab/gaussian.hpp"
#include "identlab/rng.hpp"

using namespace identlab;

namespace {

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& draws) {
  const Eigen::RowVectorXd m = draws.colwise().mean();
  const Eigen::MatrixXd c = draws.rowwise() - m;
  return c.transpose() * c / static_cast<double>(draws.rows() - 1);
}

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

TEST_CASE("cholesky of the identity is the identity") {
  const CholFactor c = cholesky(Eigen::MatrixXd::Identity(3, 3));
  CHECK((c.lower - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cholesky of a 2x2 SPD matrix") {
  Eigen::MatrixXd s(2, 2);
  s << 4, 2, 2, 3;
  const CholFactor c = cholesky(s);
  CHECK(c.lower(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(c.lower(0, 1) == 0.0);
  CHECK(c.lower(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.lower(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK((c.lower * c.lower.transpose() - s).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("cholesky rejects rank-deficient and indefinite input") {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
  CHECK(code_of([&] { cholesky(ones); }) == ErrorCode::NotPositiveDefinite);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK(code_of([&] { cholesky(indefinite, Definiteness::Semi); }) == ErrorCode::NotPositiveDefinite);
  // semi-definite mode accepts the rank-one case
  const CholFactor semi = cholesky(ones, Definiteness::Semi);
  CHECK((semi.lower * semi.lower.transpose() - ones).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rho outside [0,1) is rejected") {
  CHECK(code_of([] { equicorr_mvn({.n = 2, .mu = 0, .sigma2 = 1, .rho = 1.0}); }) == ErrorCode::InvalidRho);
  CHECK(code_of([] { equicorr_mvn({.n = 2, .mu = 0, .sigma2 = 1, .rho = -0.1}); }) == ErrorCode::InvalidRho);
}

TEST_CASE("equicorr_mvn builds the compound-symmetry matrix") {
  const MvNormal iid = equicorr_mvn({.n = 2, .mu = 0, .sigma2 = 1, .rho = 0});
  CHECK((iid.cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(iid.mean.isZero());

  const MvNormal d = equicorr_mvn({.n = 3, .mu = 1, .sigma2 = 2, .rho = 0.5});
  for (int i = 0; i < 3; ++i) {
    CHECK(d.mean(i) == 1.0);
    for (int j = 0; j < 3; ++j) CHECK(d.cov(i, j) == doctest::Approx(i == j ? 2.0 : 1.0));
  }
}

TEST_CASE("mvn_sample: moments of the standard bivariate normal") {
  MvNormal d{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
  Rng rng = Stream(11).engine();
  const std::size_t count = 100000;
  const Eigen::MatrixXd x = mvn_sample(d, count, rng);
  REQUIRE(x.rows() == static_cast<Eigen::Index>(count));
  const Eigen::MatrixXd c = sample_cov(x);
  // SE of a sample variance of N(0,1) is sqrt(2/n); of a covariance sqrt(1/n).
  CHECK(std::abs(c(0, 0) - 1.0) < 3.0 * std::sqrt(2.0 / count));
  CHECK(std::abs(c(1, 1) - 1.0) < 3.0 * std::sqrt(2.0 / count));
  CHECK(std::abs(c(0, 1)) < 3.0 * std::sqrt(1.0 / count));
}

TEST_CASE("mvn_sample: zero variance returns the mean exactly") {
  MvNormal d{Eigen::VectorXd::Constant(1, 5.0), Eigen::MatrixXd::Zero(1, 1)};
  Rng rng = Stream(3).engine();
  const Eigen::MatrixXd x = mvn_sample(d, 100, rng);
  CHECK((x.array() == 5.0).all());
}

TEST_CASE("mvn_sample: equicorrelated off-diagonal correlations") {
  const MvNormal d = equicorr_mvn({.n = 3, .mu = 0, .sigma2 = 1, .rho = 0.5});
  Rng rng = Stream(5).engine();
  const std::size_t count = 100000;
  const Eigen::MatrixXd c = sample_cov(mvn_sample(d, count, rng));
  // Var of the sample correlation ~ (1 - r^2)^2 / n.
  const double se = (1.0 - 0.25) / std::sqrt(static_cast<double>(count));
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double r = c(i, j) / std::sqrt(c(i, i) * c(j, j));
      CHECK(std::abs(r - 0.5) < 3.0 * se);
    }
}

TEST_CASE("mvn_condition on a bivariate normal") {
  for (double r : {0.0, 0.8}) {
    MvNormal d{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
    d.cov(0, 1) = d.cov(1, 0) = r;
    const std::vector<std::size_t> idx{1};
    const MvNormal c = mvn_condition(d, idx, Eigen::VectorXd::Constant(1, 1.0));
    REQUIRE(c.dim() == 1);
    CHECK(c.mean(0) == doctest::Approx(r).epsilon(1e-14));
    CHECK(c.cov(0, 0) == doctest::Approx(1.0 - r * r).epsilon(1e-14));
  }
}

TEST_CASE("mvn_condition errors") {
  MvNormal d{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
  const std::vector<std::size_t> bad{2};
  CHECK(code_of([&] { mvn_condition(d, bad, Eigen::VectorXd::Zero(1)); }) == ErrorCode::IndexOutOfRange);
  MvNormal singular{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Ones(3, 3)};
  const std::vector<std::size_t> two{1, 2};
  CHECK(code_of([&] { mvn_condition(singular, two, Eigen::VectorXd::Zero(2)); }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("conditioning the augmented vector on its mean") {
  const EquicorrSpec spec{.n = 2, .mu = 0, .sigma2 = 1, .rho = 0};
  const MvNormal aug = augmented_equicorr(spec);
  REQUIRE(aug.dim() == 3);
  const std::vector<std::size_t> idx{2};
  const MvNormal c = mvn_condition(aug, idx, Eigen::VectorXd::Zero(1));
  CHECK(c.mean.cwiseAbs().maxCoeff() < 1e-15);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  CHECK((c.cov - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("closed-form conditional given the mean") {
  Eigen::MatrixXd half(2, 2);
  half << 0.5, -0.5, -0.5, 0.5;
  const MvNormal a = conditional_given_mean({.n = 2, .mu = 0, .sigma2 = 1, .rho = 0}, 0.0);
  CHECK((a.cov - half).cwiseAbs().maxCoeff() < 1e-15);

  const EquicorrSpec spec{.n = 2, .mu = 0, .sigma2 = 1, .rho = 0.5};
  const MvNormal b = conditional_given_mean(spec, 3.0);
  CHECK(b.mean(0) == doctest::Approx(3.0));
  CHECK(b.mean(1) == doctest::Approx(3.0));
  CHECK((b.cov - 0.5 * half).cwiseAbs().maxCoeff() < 1e-15);
  const MvNormal s = conditional_given_mean_schur(spec, 3.0);
  CHECK((s.mean - b.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.cov - b.cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conditional law given the mean does not depend on mu") {
  for (std::size_t n : {2u, 7u, 40u}) {
    for (double rho : {0.0, 0.3, 0.95}) {
      const EquicorrSpec a{.n = n, .mu = 0, .sigma2 = 1.7, .rho = rho};
      EquicorrSpec b = a;
      b.mu = 7.0;
      const MvNormal ca = conditional_given_mean_schur(a, -0.4);
      const MvNormal cb = conditional_given_mean_schur(b, -0.4);
      CHECK((ca.mean - cb.mean).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((ca.cov - cb.cov).cwiseAbs().maxCoeff() < 1e-10);
      const MvNormal closed = conditional_given_mean(a, -0.4);
      CHECK((closed.cov - ca.cov).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("law of the sample mean") {
  CHECK(mean_law({.n = 10, .mu = 0, .sigma2 = 1, .rho = 0}).variance == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(mean_law({.n = 10, .mu = 0, .sigma2 = 1, .rho = 0.5}).variance == doctest::Approx(0.55).epsilon(1e-14));
  CHECK(std::abs(mean_law({.n = 1000000, .mu = 0, .sigma2 = 1, .rho = 0.5}).variance - 0.5) < 1e-6);
  CHECK(mean_law({.n = 4, .mu = 2.5, .sigma2 = 1, .rho = 0.5}).mean == 2.5);
}
