#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "identlab/models.hpp"
#include "identlab/rng.hpp"
#include "identlab/stats.hpp"

namespace identlab {

// Centers are rows, lexicographically ordered; labels index into them.
struct KMeansFit {
  Eigen::MatrixXd centers;
  std::vector<std::size_t> labels;
  double objective = 0.0;
  std::size_t iterations = 0;
};

struct LloydOptions {
  std::size_t restarts = 32;
  std::size_t max_iter = 500;
  double tol = 1e-10;
};

// Multi-restart Lloyd iteration from uniform random k-subsets of the data.
// Throws NumericalFailure if the objective ever increases between iterations.
KMeansFit lloyd(const Eigen::MatrixXd& data, std::size_t k, const LloydOptions& options, Rng& rng);

// Exact global minimiser of the k-means objective by enumerating partitions.
// Requires k^n <= 1e7.
KMeansFit brute_force_kmeans(const Eigen::MatrixXd& data, std::size_t k);

// Nearest center, ties to the lower index.
std::size_t voronoi_assign(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::MatrixXd& centers);

double kmeans_objective(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centers,
                        const std::vector<std::size_t>& labels);

// Sorts centers lexicographically and remaps labels; the objective is untouched.
void sort_lexicographic(KMeansFit& fit);

struct ConsistencyRow {
  std::size_t n = 0;
  std::size_t reps = 0;
  std::size_t correct = 0;
  double frac_correct = 0.0;
  Interval ci;
};

using ConsistencyTable = std::vector<ConsistencyRow>;

struct ConsistencyOptions {
  std::size_t reps = 200;
  double level = 0.99;
  LloydOptions lloyd{.restarts = 4, .max_iter = 500, .tol = 1e-10};
  unsigned threads = 0;
};

using MembershipModel = std::variant<FixedClassSpec, MixtureFixedClassSpec>;

// For each n: fresh data from the model (first n labels), k-means fit, and
// whether the first observation is assigned to its true label.
ConsistencyTable membership_consistency_experiment(const MembershipModel& model, const std::vector<std::size_t>& n_grid,
                                                   const ConsistencyOptions& options, const Stream& stream);

// Probability that a point generated at one of two centers distance delta
// apart lies nearer the other center: Phi(-delta / (2 sigma)).
double misclassification_floor(double delta, double sigma);

}  // namespace identlab
