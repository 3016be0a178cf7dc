#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "identlab/error.hpp"
#include "identlab/kmeans.hpp"
#include "identlab/models.hpp"
#include "identlab/stats.hpp"
#include "oracles.hpp"

using namespace identlab;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("lloyd and brute force on {0, 1, 10}") {
  const Eigen::MatrixXd x = column({0, 1, 10});
  Rng rng = Stream(1).engine();
  const KMeansFit fit = lloyd(x, 2, {}, rng);
  CHECK(fit.objective == doctest::Approx(0.5));
  CHECK(fit.centers(0, 0) == doctest::Approx(0.5));
  CHECK(fit.centers(1, 0) == doctest::Approx(10.0));
  CHECK(fit.labels == std::vector<std::size_t>{0, 0, 1});
  const KMeansFit exact = brute_force_kmeans(x, 2);
  CHECK(exact.objective == doctest::Approx(0.5));
  CHECK(exact.objective == doctest::Approx(oracle::kmeans_1d_optimum({0, 1, 10}, 2)));
}

TEST_CASE("k distinct points give zero objective") {
  const Eigen::MatrixXd x = column({3, -1, 7});
  Rng rng = Stream(2).engine();
  const KMeansFit fit = lloyd(x, 3, {}, rng);
  CHECK(fit.objective == 0.0);
  CHECK(fit.centers(0, 0) == -1.0);
  CHECK(fit.centers(2, 0) == 7.0);
  CHECK(brute_force_kmeans(x, 3).objective == 0.0);
  const KMeansFit sym = brute_force_kmeans(column({-1, 1}), 2);
  CHECK(sym.centers(0, 0) == -1.0);
  CHECK(sym.centers(1, 0) == 1.0);
}

TEST_CASE("k-means argument checks") {
  Rng rng = Stream(3).engine();
  CHECK_THROWS_AS(lloyd(column({1, 2}), 3, {}, rng), Error);
  Eigen::MatrixXd big = Eigen::MatrixXd::Random(30, 1);
  try {
    brute_force_kmeans(big, 3);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("voronoi assignment and ties") {
  const Eigen::MatrixXd centers = column({0, 10});
  CHECK(voronoi_assign(Eigen::VectorXd::Constant(1, 0.0), centers) == 0);
  CHECK(voronoi_assign(Eigen::VectorXd::Constant(1, 10.0), centers) == 1);
  CHECK(voronoi_assign(Eigen::VectorXd::Constant(1, 4.0), centers) == 0);
  CHECK(voronoi_assign(Eigen::VectorXd::Constant(1, 5.0), centers) == 0);
  CHECK(voronoi_assign(Eigen::VectorXd::Constant(1, 5.0 + 1e-12), centers) == 1);
}

TEST_CASE("lexicographic sorting is idempotent and keeps the objective") {
  Eigen::MatrixXd data(6, 2);
  data << 5, 1, 5, 0, 0, 3, 0, 2, 9, 9, 8, 9;
  KMeansFit fit;
  fit.centers.resize(3, 2);
  fit.centers << 8.5, 9, 5, 0.5, 0, 2.5;
  fit.labels = {1, 1, 2, 2, 0, 0};
  fit.objective = kmeans_objective(data, fit.centers, fit.labels);
  sort_lexicographic(fit);
  CHECK(fit.centers(0, 0) == 0.0);
  CHECK(fit.centers(1, 0) == 5.0);
  CHECK(fit.centers(2, 0) == 8.5);
  CHECK(fit.labels == std::vector<std::size_t>{1, 1, 0, 0, 2, 2});
  CHECK(kmeans_objective(data, fit.centers, fit.labels) == doctest::Approx(fit.objective));
  const KMeansFit once = fit;
  sort_lexicographic(fit);
  CHECK(fit.centers == once.centers);
  CHECK(fit.labels == once.labels);
}

TEST_CASE("lloyd reaches the global optimum on random toy data") {
  int equal = 0;
  for (std::uint64_t d = 0; d < 100; ++d) {
    Rng rng = Stream(500 + d).engine();
    const std::size_t k = 1 + d % 3;
    const std::size_t n = 4 + d % 7;
    const std::size_t p = 1 + (d / 3) % 2;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = draw_normal(rng);
    const KMeansFit fit = lloyd(x, k, {.restarts = 32}, rng);
    const KMeansFit exact = brute_force_kmeans(x, k);
    CHECK(fit.objective >= exact.objective * (1.0 - 1e-9));
    if (p == 1) CHECK(exact.objective == doctest::Approx(oracle::kmeans_1d_optimum(
                          std::vector<double>(x.data(), x.data() + x.size()), k)).epsilon(1e-9));
    equal += fit.objective <= exact.objective * (1.0 + 1e-9) + 1e-300;
  }
  CHECK(equal >= 99);
}

TEST_CASE("misclassification floor") {
  CHECK(misclassification_floor(2.0, 1.0) == doctest::Approx(0.158655253931457).epsilon(1e-12));
  CHECK(misclassification_floor(200.0, 1.0) < 1e-300);
  CHECK(misclassification_floor(1e-12, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("zero-noise fixed classification is always recovered") {
  FixedClassSpec spec;
  spec.centers = column({0, 2});
  spec.sigma2 = 0.0;
  spec.labels.resize(400);
  for (std::size_t i = 0; i < spec.labels.size(); ++i) spec.labels[i] = i % 2;
  ConsistencyOptions opts;
  opts.reps = 50;
  const ConsistencyTable t = membership_consistency_experiment(spec, {10, 100, 400}, opts, Stream(4));
  for (const auto& row : t) CHECK(row.frac_correct == 1.0);
}

TEST_CASE("gaussian fixed classification plateaus at the floor") {
  FixedClassSpec spec;
  spec.centers = column({0, 2});
  spec.sigma2 = 1.0;
  spec.labels.resize(1000);
  for (std::size_t i = 0; i < spec.labels.size(); ++i) spec.labels[i] = i % 2;
  ConsistencyOptions opts;
  opts.reps = 600;
  const ConsistencyTable t = membership_consistency_experiment(spec, {1000}, opts, Stream(5));
  CHECK(t[0].ci.contains(1.0 - misclassification_floor(2.0, 1.0)));
  CHECK(t[0].ci.hi < 1.0);
}

TEST_CASE("fitted centers approach the population centers") {
  AssociatedMixtureOptions mopts;
  mopts.approx_budget = 200000;
  mopts.n_labels = 4000;
  Rng rng = Stream(6).engine();
  const MixtureFixedClassSpec spec =
      associated_mixture(gaussian_mixture_1d({-1.5, 1.5}, {0.5, 0.5}, 1.0), 1, 2, mopts, rng);
  std::vector<double> err_small(50), err_large(50);
  for (std::uint64_t r = 0; r < 50; ++r) {
    Rng a = Stream(7).child(r).engine();
    const KMeansFit small = lloyd(sample_mixture_fixed_class(spec, 1000, a), 2, {.restarts = 4}, a);
    Rng b = Stream(8).child(r).engine();
    const KMeansFit large = lloyd(sample_mixture_fixed_class(spec, 4000, b), 2, {.restarts = 4}, b);
    err_small[r] = (small.centers - spec.pop_centers).norm();
    err_large[r] = (large.centers - spec.pop_centers).norm();
  }
  CHECK(quantile(err_large, 0.5) < quantile(err_small, 0.5));
}
