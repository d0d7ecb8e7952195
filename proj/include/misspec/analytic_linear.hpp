#ifndef MISSPEC_ANALYTIC_LINEAR_HPP
#define MISSPEC_ANALYTIC_LINEAR_HPP

#include <array>
#include <cmath>

#include "misspec/moments.hpp"

namespace misspec {

/// Coefficients of Y = b0 + b1 X1 + b2 X2 + eps.
template <typename Scalar>
struct LinearDgpCoefficients {
  Scalar beta0 = 0, beta1 = 0, beta2 = 0;
};

/// Population least-squares coefficients of the model that omits X2.
template <typename Scalar>
struct ShortModelCoefficients {
  Scalar gamma0 = 0, gamma1 = 0;
};

/// Expected prediction error e = Yhat - Y in the population and per group,
/// and the bias tau = b_group1 - b_group0.
template <typename Scalar>
struct GroupErrorPrediction {
  Scalar b_pop = 0;
  Scalar b_group0 = 0, b_group1 = 0;
  Scalar tau = 0;
};

inline constexpr double kVarianceTolerance = 1e-12;

/// Under correct specification the population least-squares fit recovers beta.
template <typename Scalar>
std::array<Scalar, 3> correct_spec_coefficients(const LinearDgpCoefficients<Scalar>& beta) {
  return {beta.beta0, beta.beta1, beta.beta2};
}

template <typename Scalar>
GroupErrorPrediction<Scalar> correct_spec_group_errors(const LinearDgpCoefficients<Scalar>&,
                                                       const MixtureSpec<Scalar>&) {
  return {};
}

template <typename Scalar>
ShortModelCoefficients<Scalar> omitted_coefficients(const LinearDgpCoefficients<Scalar>& beta,
                                                    const MomentSummary<Scalar>& m) {
  if (!(m.var_x1 > Scalar(kVarianceTolerance))) {
    throw DegenerateVarianceError("Var(X1) is zero; the short model is not identified");
  }
  ShortModelCoefficients<Scalar> g;
  g.gamma0 = beta.beta0 + beta.beta2 * (m.e_x1_sq * m.e_x2 - m.e_x1 * m.e_x1x2) / m.var_x1;
  g.gamma1 = beta.beta1 + beta.beta2 * m.cov_x1x2 / m.var_x1;
  return g;
}

/// Group mean errors of the X1-only least-squares model:
///   b_a = (g0 - b0) + b2 * Cov/Var * E(X1|A=a) - b2 * E(X2|A=a),
/// with Cov/Var taken from the pooled moments.
template <typename Scalar>
GroupErrorPrediction<Scalar> omitted_group_errors(const LinearDgpCoefficients<Scalar>& beta,
                                                  const MixtureSpec<Scalar>& spec) {
  const auto pooled = pooled_moments(spec);
  const auto gamma = omitted_coefficients(beta, pooled);
  const Scalar slope = beta.beta2 * pooled.cov_x1x2 / pooled.var_x1;
  GroupErrorPrediction<Scalar> out;
  std::array<Scalar, 2> b{};
  for (int a = 0; a < 2; ++a) {
    const auto& mu = spec.groups[a].mean;
    b[a] = (gamma.gamma0 - beta.beta0) + slope * mu(0) - beta.beta2 * mu(1);
  }
  out.b_group0 = b[0];
  out.b_group1 = b[1];
  out.b_pop = spec.weight(1) * b[1] + spec.weight(0) * b[0];
  out.tau = b[1] - b[0];
  return out;
}

/// True iff the X1-only model is unbiased across groups:
///   Cov/Var * (E(X1|A=1) - E(X1|A=0)) == E(X2|A=1) - E(X2|A=0),
/// or beta2 is zero.
template <typename Scalar>
bool bias_vanishes_condition(const LinearDgpCoefficients<Scalar>& beta,
                             const MixtureSpec<Scalar>& spec, double tolerance = 1e-10) {
  const auto pooled = pooled_moments(spec);
  if (!(pooled.var_x1 > Scalar(kVarianceTolerance))) {
    throw DegenerateVarianceError("Var(X1) is zero; the short model is not identified");
  }
  const Vector2<Scalar> diff = spec.groups[1].mean - spec.groups[0].mean;
  const Scalar lhs = pooled.cov_x1x2 / pooled.var_x1 * diff(0);
  const Scalar gap = beta.beta2 * (lhs - diff(1));
  return std::abs(static_cast<double>(gap)) <= tolerance;
}

/// Worst-case relation b_group1 = -b_group0, |tau| = 2 |b_group1|. It holds
/// for every omitted-variable prediction when weight_protected is 1/2; with
/// unequal weights it holds only when tau is zero.
template <typename Scalar>
bool worst_case_check(const GroupErrorPrediction<Scalar>& p, const MixtureSpec<Scalar>&,
                      double tolerance = 1e-12) {
  const double b0 = static_cast<double>(p.b_group0);
  const double b1 = static_cast<double>(p.b_group1);
  const double tau = static_cast<double>(p.tau);
  return std::abs(b1 + b0) <= tolerance &&
         std::abs(std::abs(tau) - 2.0 * std::abs(b1)) <= tolerance;
}

using LinearBeta = LinearDgpCoefficients<double>;
using ShortCoefficients = ShortModelCoefficients<double>;
using GroupErrors = GroupErrorPrediction<double>;

}  // namespace misspec

#endif  // MISSPEC_ANALYTIC_LINEAR_HPP
