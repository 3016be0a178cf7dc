#include "identlab/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "identlab/error.hpp"
#include "identlab/parallel.hpp"

namespace identlab {

namespace {

void check_data(const Eigen::MatrixXd& data, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k-means: k must be >= 1");
  if (static_cast<std::size_t>(data.rows()) < k) {
    throw Error(ErrorCode::TooFewPoints, "k-means: need at least k = " + std::to_string(k) + " points");
  }
  if (!data.allFinite()) throw Error(ErrorCode::InvalidArgument, "k-means: data must be finite");
}

// Assign every point to its nearest center; returns the objective.
double assign_all(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centers, std::vector<std::size_t>& labels) {
  double w = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {
      const double d = (data.row(i) - centers.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::size_t>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    w += best_d;
  }
  return w;
}

// Empty clusters keep their previous center.
void update_centers(const Eigen::MatrixXd& data, const std::vector<std::size_t>& labels, Eigen::MatrixXd& centers) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(centers.rows(), centers.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(centers.rows()), 0);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const auto g = labels[static_cast<std::size_t>(i)];
    sums.row(static_cast<Eigen::Index>(g)) += data.row(i);
    ++counts[g];
  }
  for (Eigen::Index j = 0; j < centers.rows(); ++j) {
    const auto c = counts[static_cast<std::size_t>(j)];
    if (c > 0) centers.row(j) = sums.row(j) / static_cast<double>(c);
  }
}

// Uniform random k-subset of the rows, skipping rows that duplicate an
// already chosen point while distinct rows remain.
Eigen::MatrixXd initial_centers(const Eigen::MatrixXd& data, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), data.cols());
  std::size_t chosen = 0;
  std::vector<std::size_t> duplicates;
  for (std::size_t t = 0; t < n && chosen < k; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, n - 1);
    std::swap(order[t], order[pick(rng)]);
    const auto row = data.row(static_cast<Eigen::Index>(order[t]));
    bool dup = false;
    for (std::size_t j = 0; j < chosen && !dup; ++j) dup = (centers.row(static_cast<Eigen::Index>(j)) == row);
    if (dup) {
      duplicates.push_back(order[t]);
      continue;
    }
    centers.row(static_cast<Eigen::Index>(chosen++)) = row;
  }
  for (std::size_t t = 0; chosen < k; ++t) centers.row(static_cast<Eigen::Index>(chosen++)) = data.row(static_cast<Eigen::Index>(duplicates[t]));
  return centers;
}

KMeansFit lloyd_single(const Eigen::MatrixXd& data, std::size_t k, const LloydOptions& options, Rng& rng) {
  KMeansFit fit;
  fit.centers = initial_centers(data, k, rng);
  fit.labels.assign(static_cast<std::size_t>(data.rows()), 0);
  double w = assign_all(data, fit.centers, fit.labels);
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    update_centers(data, fit.labels, fit.centers);
    const double next = assign_all(data, fit.centers, fit.labels);
    fit.iterations = it + 1;
    if (next > w * (1.0 + 1e-12) + 1e-300) {
      throw Error(ErrorCode::NumericalFailure, "lloyd: objective increased from " + std::to_string(w) + " to " + std::to_string(next));
    }
    const bool done = (w - next) <= options.tol * std::max(w, std::numeric_limits<double>::min());
    w = next;
    if (done) break;
  }
  fit.objective = w;
  return fit;
}

bool lex_less_rows(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (m(a, c) != m(b, c)) return m(a, c) < m(b, c);
  }
  return false;
}

// Lex-sort the centers, then relabel by the Voronoi rule against the sorted set.
void finalize(const Eigen::MatrixXd& data, KMeansFit& fit) {
  sort_lexicographic(fit);
  assign_all(data, fit.centers, fit.labels);
  fit.objective = kmeans_objective(data, fit.centers, fit.labels);
}

}  // namespace

void sort_lexicographic(KMeansFit& fit) {
  const auto k = static_cast<std::size_t>(fit.centers.rows());
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less_rows(fit.centers, static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  });
  std::vector<std::size_t> new_index(k);
  Eigen::MatrixXd sorted(fit.centers.rows(), fit.centers.cols());
  for (std::size_t r = 0; r < k; ++r) {
    sorted.row(static_cast<Eigen::Index>(r)) = fit.centers.row(static_cast<Eigen::Index>(order[r]));
    new_index[order[r]] = r;
  }
  fit.centers = std::move(sorted);
  for (auto& g : fit.labels) g = new_index[g];
}

KMeansFit lloyd(const Eigen::MatrixXd& data, std::size_t k, const LloydOptions& options, Rng& rng) {
  check_data(data, k);
  if (options.restarts < 1) throw Error(ErrorCode::InvalidArgument, "lloyd: restarts must be >= 1");
  KMeansFit best;
  best.objective = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < options.restarts; ++r) {
    KMeansFit fit = lloyd_single(data, k, options, rng);
    if (fit.objective < best.objective) best = std::move(fit);
  }
  finalize(data, best);
  return best;
}

KMeansFit brute_force_kmeans(const Eigen::MatrixXd& data, std::size_t k) {
  check_data(data, k);
  const auto n = static_cast<std::size_t>(data.rows());
  if (std::pow(static_cast<double>(k), static_cast<double>(n)) > 1e7) {
    throw Error(ErrorCode::TooLarge, "brute_force_kmeans: k^n exceeds 1e7");
  }

  // Enumerate set partitions into exactly k blocks as restricted growth strings.
  std::vector<std::size_t> label(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  std::vector<std::size_t> best_label;
  double best_w = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), data.cols());

  auto evaluate = [&] {
    update_centers(data, label, centers);
    const double w = kmeans_objective(data, centers, label);
    if (w < best_w) {
      best_w = w;
      best_label = label;
    }
  };

  std::function<void(std::size_t, std::size_t)> recurse = [&](std::size_t i, std::size_t used) {
    if (i == n) {
      if (used == k) evaluate();
      return;
    }
    if (used + (n - i) < k) return;
    for (std::size_t g = 0; g <= std::min(used, k - 1); ++g) {
      label[i] = g;
      recurse(i + 1, g == used ? used + 1 : used);
    }
  };
  recurse(0, 0);

  KMeansFit fit;
  fit.labels = best_label;
  fit.centers = Eigen::MatrixXd(static_cast<Eigen::Index>(k), data.cols());
  update_centers(data, fit.labels, fit.centers);
  finalize(data, fit);
  return fit;
}

std::size_t voronoi_assign(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::MatrixXd& centers) {
  if (centers.rows() < 1) throw Error(ErrorCode::InvalidArgument, "voronoi_assign: no centers");
  if (centers.cols() != x.size()) throw Error(ErrorCode::InvalidArgument, "voronoi_assign: dimension mismatch");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < centers.rows(); ++j) {
    const double d = (centers.row(j).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(j);
    }
  }
  return best;
}

double kmeans_objective(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centers,
                        const std::vector<std::size_t>& labels) {
  if (labels.size() != static_cast<std::size_t>(data.rows())) {
    throw Error(ErrorCode::InvalidArgument, "kmeans_objective: one label per row required");
  }
  double w = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    w += (data.row(i) - centers.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]))).squaredNorm();
  }
  return w;
}

ConsistencyTable membership_consistency_experiment(const MembershipModel& model, const std::vector<std::size_t>& n_grid,
                                                   const ConsistencyOptions& options, const Stream& stream) {
  if (n_grid.empty()) throw Error(ErrorCode::InvalidArgument, "membership_consistency_experiment: empty n grid");
  if (options.reps < 1) throw Error(ErrorCode::InvalidArgument, "membership_consistency_experiment: reps must be >= 1");

  std::size_t k = 0;
  std::size_t label_count = 0;
  std::size_t true_label = 0;
  std::visit(
      [&](const auto& spec) {
        spec.validate();
        label_count = spec.labels.size();
        if (label_count == 0) throw Error(ErrorCode::InvalidArgument, "membership_consistency_experiment: model has no labels");
        true_label = spec.labels.front();
        if constexpr (std::is_same_v<std::decay_t<decltype(spec)>, FixedClassSpec>) {
          k = spec.k();
        } else {
          k = spec.k;
        }
      },
      model);

  ConsistencyTable table;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::size_t n = n_grid[gi];
    if (n < k || n > label_count) {
      throw Error(ErrorCode::InvalidArgument, "membership_consistency_experiment: n = " + std::to_string(n) +
                                                  " outside [k, number of labels]");
    }
    std::vector<std::uint8_t> hit(options.reps, 0);
    parallel_for(options.reps, options.threads, [&](std::size_t r) {
      Rng rng = stream.child(gi, r).engine();
      const Eigen::MatrixXd data = std::visit(
          [&](const auto& spec) -> Eigen::MatrixXd {
            if constexpr (std::is_same_v<std::decay_t<decltype(spec)>, FixedClassSpec>) {
              return sample_fixed_class(spec, n, rng);
            } else {
              return sample_mixture_fixed_class(spec, n, rng);
            }
          },
          model);
      const KMeansFit fit = lloyd(data, k, options.lloyd, rng);
      hit[r] = fit.labels.front() == true_label ? 1 : 0;
    });
    ConsistencyRow row;
    row.n = n;
    row.reps = options.reps;
    row.correct = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), std::uint8_t{1}));
    row.frac_correct = static_cast<double>(row.correct) / static_cast<double>(row.reps);
    row.ci = clopper_pearson(row.correct, row.reps, options.level);
    table.push_back(row);
  }
  return table;
}

double misclassification_floor(double delta, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "misclassification_floor: sigma must be > 0");
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "misclassification_floor: delta must be >= 0");
  if (std::isinf(delta)) return 0.0;
  return normal_cdf(-delta / (2.0 * sigma));
}

}  // namespace identlab
