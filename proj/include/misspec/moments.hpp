#ifndef MISSPEC_MOMENTS_HPP
#define MISSPEC_MOMENTS_HPP

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <string>

#include "misspec/core.hpp"

namespace misspec {

/// Bivariate Gaussian feature distribution of one group: X | A=a ~ N(mean, covariance).
template <typename Scalar>
struct GroupGaussianSpec {
  Vector2<Scalar> mean = Vector2<Scalar>::Zero();
  Matrix2<Scalar> covariance = Matrix2<Scalar>::Identity();
};

/// Two-group mixture. groups[0] is the regular group (A=0), groups[1] the
/// protected group (A=1); weight_protected is Pr(A=1).
template <typename Scalar>
struct MixtureSpec {
  std::array<GroupGaussianSpec<Scalar>, 2> groups;
  Scalar weight_protected = Scalar(0.5);

  Scalar weight(int a) const { return a == 1 ? weight_protected : Scalar(1) - weight_protected; }
};

/// First and second moments of (X1, X2), either pooled over the mixture or
/// for a single group.
template <typename Scalar>
struct MomentSummary {
  Scalar e_x1 = 0, e_x2 = 0;
  Scalar e_x1_sq = 0, e_x2_sq = 0;
  Scalar e_x1x2 = 0;
  Scalar var_x1 = 0, var_x2 = 0, cov_x1x2 = 0;
};

inline constexpr double kPsdTolerance = -1e-10;

template <typename Scalar>
void validate(const GroupGaussianSpec<Scalar>& g, const std::string& what = "group") {
  if (!g.mean.allFinite() || !g.covariance.allFinite()) {
    throw ValidationError(what + ": non-finite mean or covariance entry");
  }
  if (g.covariance(0, 1) != g.covariance(1, 0)) {
    throw ValidationError(what + ": covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix2<Scalar>> eig(g.covariance, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < Scalar(kPsdTolerance)) {
    throw ValidationError(what + ": covariance is not positive semi-definite");
  }
}

template <typename Scalar>
void validate(const MixtureSpec<Scalar>& spec) {
  const Scalar w = spec.weight_protected;
  if (!std::isfinite(static_cast<double>(w)) || w < Scalar(0) || w > Scalar(1)) {
    throw ValidationError("weight_protected must lie in [0, 1]");
  }
  validate(spec.groups[0], "group 0");
  validate(spec.groups[1], "group 1");
}

namespace detail {

template <typename Scalar>
MomentSummary<Scalar> finish(Scalar e1, Scalar e2, Scalar e11, Scalar e22, Scalar e12) {
  MomentSummary<Scalar> m;
  m.e_x1 = e1;
  m.e_x2 = e2;
  m.e_x1_sq = e11;
  m.e_x2_sq = e22;
  m.e_x1x2 = e12;
  m.var_x1 = e11 - e1 * e1;
  m.var_x2 = e22 - e2 * e2;
  m.cov_x1x2 = e12 - e1 * e2;
  return m;
}

}  // namespace detail

/// Moments of the single component `a`. Variances are taken from the
/// covariance directly rather than through E[X^2] - (EX)^2.
template <typename Scalar>
MomentSummary<Scalar> group_moments(const MixtureSpec<Scalar>& spec, int a) {
  if (a != 0 && a != 1) throw ValidationError("group label must be 0 or 1");
  validate(spec);
  const auto& g = spec.groups[a];
  MomentSummary<Scalar> m;
  m.e_x1 = g.mean(0);
  m.e_x2 = g.mean(1);
  m.var_x1 = g.covariance(0, 0);
  m.var_x2 = g.covariance(1, 1);
  m.cov_x1x2 = g.covariance(0, 1);
  m.e_x1_sq = m.var_x1 + m.e_x1 * m.e_x1;
  m.e_x2_sq = m.var_x2 + m.e_x2 * m.e_x2;
  m.e_x1x2 = m.cov_x1x2 + m.e_x1 * m.e_x2;
  return m;
}

/// Exact mixture moments by the laws of total expectation and covariance.
template <typename Scalar>
MomentSummary<Scalar> pooled_moments(const MixtureSpec<Scalar>& spec) {
  validate(spec);
  Vector2<Scalar> mean = Vector2<Scalar>::Zero();
  Matrix2<Scalar> second = Matrix2<Scalar>::Zero();
  for (int a = 0; a < 2; ++a) {
    const Scalar p = spec.weight(a);
    if (p == Scalar(0)) continue;
    const auto& g = spec.groups[a];
    mean += p * g.mean;
    second += p * (g.covariance + g.mean * g.mean.transpose());
  }
  // A one-component mixture reproduces that component exactly.
  for (int a = 0; a < 2; ++a) {
    if (spec.weight(a) == Scalar(1)) return group_moments(spec, a);
  }
  auto m = detail::finish(mean(0), mean(1), second(0, 0), second(1, 1), second(0, 1));
  // Law of total covariance, evaluated without cancellation.
  Matrix2<Scalar> cov = Matrix2<Scalar>::Zero();
  for (int a = 0; a < 2; ++a) {
    const Scalar p = spec.weight(a);
    const auto& g = spec.groups[a];
    const Vector2<Scalar> d = g.mean - mean;
    cov += p * (g.covariance + d * d.transpose());
  }
  m.var_x1 = cov(0, 0);
  m.var_x2 = cov(1, 1);
  m.cov_x1x2 = cov(0, 1);
  return m;
}

using GroupGaussian = GroupGaussianSpec<double>;
using Mixture = MixtureSpec<double>;
using Moments = MomentSummary<double>;

/// The two-group configuration used throughout the Table 1 simulations.
inline Mixture table1_mixture() {
  Mixture spec;
  spec.groups[0].mean << 1.0, 1.0;
  spec.groups[0].covariance << 1.0, 0.5, 0.5, 1.0;
  spec.groups[1].mean << 1.0, 3.0;
  spec.groups[1].covariance << 1.0, -0.5, -0.5, 1.0;
  spec.weight_protected = 0.5;
  return spec;
}

}  // namespace misspec

#endif  // MISSPEC_MOMENTS_HPP
