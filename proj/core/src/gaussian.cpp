#include "identlab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "identlab/error.hpp"

namespace identlab {

namespace {

void check_square(const Eigen::MatrixXd& s, const char* what) {
  if (s.rows() != s.cols()) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": matrix is not square");
  if (static_cast<std::size_t>(s.rows()) > kMaxDimension) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": dimension exceeds configured maximum");
  }
}

}  // namespace

void MvNormal::validate() const {
  check_square(cov, "MvNormal");
  if (cov.rows() != mean.size()) throw Error(ErrorCode::InvalidArgument, "MvNormal: mean/cov size mismatch");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InvalidArgument, "MvNormal: covariance is not symmetric");
  }
  if (cov.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
      throw Error(ErrorCode::NotPositiveDefinite, "MvNormal: covariance has a negative eigenvalue");
    }
  }
}

void EquicorrSpec::validate() const {
  if (n < 1 || n > kMaxDimension) throw Error(ErrorCode::InvalidArgument, "EquicorrSpec: n out of range");
  if (!std::isfinite(mu)) throw Error(ErrorCode::InvalidArgument, "EquicorrSpec: mu must be finite");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw Error(ErrorCode::InvalidArgument, "EquicorrSpec: sigma2 must be > 0");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidRho, "EquicorrSpec: rho must lie in [0, 1)");
}

CholFactor cholesky(const Eigen::MatrixXd& s, Definiteness mode) {
  check_square(s, "cholesky");
  const Eigen::Index n = s.rows();
  const double tol = n == 0 ? 0.0 : 1e-12 * std::max(0.0, s.diagonal().maxCoeff());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);

  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = s(j, j) - l.row(j).head(j).squaredNorm();
    if (pivot <= tol) {
      if (mode == Definiteness::Semi && pivot >= -tol) {
        continue;  // column j stays zero
      }
      throw Error(ErrorCode::NotPositiveDefinite,
                  "cholesky: pivot " + std::to_string(pivot) + " at column " + std::to_string(j));
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (s(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
    }
  }
  return CholFactor{std::move(l)};
}

Eigen::MatrixXd mvn_sample(const MvNormal& d, std::size_t count, Rng& rng) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "mvn_sample: count must be >= 1");
  d.validate();
  const CholFactor chol = cholesky(d.cov, Definiteness::Semi);
  const Eigen::Index n = d.mean.size();
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), n);
  Eigen::VectorXd z(n);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    out.row(r) = (d.mean + chol.lower.triangularView<Eigen::Lower>() * z).transpose();
  }
  return out;
}

MvNormal mvn_condition(const MvNormal& d, std::span<const std::size_t> observed_indices,
                       const Eigen::VectorXd& observed_values) {
  d.validate();
  const std::size_t n = d.dim();
  if (observed_values.size() != static_cast<Eigen::Index>(observed_indices.size())) {
    throw Error(ErrorCode::InvalidArgument, "mvn_condition: index/value count mismatch");
  }
  std::vector<bool> is_observed(n, false);
  for (std::size_t idx : observed_indices) {
    if (idx >= n) throw Error(ErrorCode::IndexOutOfRange, "mvn_condition: index " + std::to_string(idx));
    if (is_observed[idx]) throw Error(ErrorCode::InvalidArgument, "mvn_condition: duplicate index");
    is_observed[idx] = true;
  }
  std::vector<Eigen::Index> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_observed[i]) free.push_back(static_cast<Eigen::Index>(i));
  }
  std::vector<Eigen::Index> obs(observed_indices.begin(), observed_indices.end());

  const Eigen::VectorXd mu1 = d.mean(free);
  const Eigen::VectorXd mu2 = d.mean(obs);
  const Eigen::MatrixXd s11 = d.cov(free, free);
  const Eigen::MatrixXd s12 = d.cov(free, obs);
  const Eigen::MatrixXd s22 = d.cov(obs, obs);

  if (obs.empty()) return MvNormal{mu1, s11};

  const CholFactor chol = cholesky(s22);
  const auto lower = chol.lower.triangularView<Eigen::Lower>();
  // B = L^{-1} S21, so S12 S22^{-1} S21 = B^T B.
  const Eigen::MatrixXd b = lower.solve(s12.transpose());
  const Eigen::VectorXd w = lower.solve(observed_values - mu2);

  MvNormal out;
  out.mean = mu1 + b.transpose() * w;
  Eigen::MatrixXd cov = s11 - b.transpose() * b;
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

MvNormal equicorr_mvn(const EquicorrSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n);
  MvNormal d;
  d.mean = Eigen::VectorXd::Constant(n, spec.mu);
  d.cov = Eigen::MatrixXd::Constant(n, n, spec.rho * spec.sigma2);
  d.cov.diagonal().setConstant(spec.sigma2);
  return d;
}

MvNormal augmented_equicorr(const EquicorrSpec& spec) {
  const MvNormal base = equicorr_mvn(spec);
  const auto n = static_cast<Eigen::Index>(spec.n);
  // Cov(X_i, mean) = Var(mean) = sigma2 (1 + (n-1) rho) / n.
  const double cross = spec.sigma2 * (1.0 + static_cast<double>(spec.n - 1) * spec.rho) / static_cast<double>(spec.n);
  MvNormal d;
  d.mean = Eigen::VectorXd::Constant(n + 1, spec.mu);
  d.cov.resize(n + 1, n + 1);
  d.cov.topLeftCorner(n, n) = base.cov;
  d.cov.col(n).setConstant(cross);
  d.cov.row(n).setConstant(cross);
  return d;
}

MvNormal conditional_given_mean(const EquicorrSpec& spec, double xbar) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n);
  const double s2 = spec.residual_variance();
  const double inv_n = 1.0 / static_cast<double>(spec.n);
  MvNormal d;
  d.mean = Eigen::VectorXd::Constant(n, xbar);
  d.cov = Eigen::MatrixXd::Constant(n, n, -s2 * inv_n);
  d.cov.diagonal().setConstant((1.0 - inv_n) * s2);
  return d;
}

MvNormal conditional_given_mean_schur(const EquicorrSpec& spec, double xbar) {
  const MvNormal joint = augmented_equicorr(spec);
  const std::size_t mean_index = spec.n;
  return mvn_condition(joint, std::span<const std::size_t>(&mean_index, 1), Eigen::VectorXd::Constant(1, xbar));
}

MeanLaw mean_law(const EquicorrSpec& spec) {
  // closed form, so the dimension cap for dense matrices does not apply
  EquicorrSpec capped = spec;
  capped.n = std::min(spec.n, kMaxDimension);
  capped.validate();
  const double n = static_cast<double>(spec.n);
  return MeanLaw{spec.mu, (1.0 - spec.rho) * spec.sigma2 / n + spec.rho * spec.sigma2};
}

}  // namespace identlab
