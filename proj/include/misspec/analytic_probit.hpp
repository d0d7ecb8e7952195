#ifndef MISSPEC_ANALYTIC_PROBIT_HPP
#define MISSPEC_ANALYTIC_PROBIT_HPP

#include <array>
#include <cmath>
#include <string>

#include "misspec/analytic_linear.hpp"
#include "misspec/moments.hpp"
#include "misspec/special_functions.hpp"

namespace misspec {

// Closed forms for the probit risk model Y = Phi(b0 + b1 X1 + b2 X2),
// equivalently Z = 1{b0 + b1 X1 + b2 X2 + eps > 0} with eps ~ N(0, 1).
//
// The omitted-variable forms assume X2 is Gaussian with mean mu2 and
// variance sigma2^2 and independent of X1. Under a two-group mixture with
// distinct group means of X2 the pooled X2 is not Gaussian, so the group
// error formula is a plug-in approximation there.

template <typename Scalar>
struct ProbitDgpCoefficients {
  Scalar beta0 = 0, beta1 = 0, beta2 = 0;
};

template <typename Scalar>
struct ProbitShortCoefficients {
  Scalar gamma0 = 0, gamma1 = 0;
};

/// E[Phi(a + b X)] for X ~ N(mu, sigma^2).
template <typename Scalar>
Scalar gaussian_cdf_expectation(Scalar a, Scalar b, Scalar mu, Scalar sigma) {
  using std::sqrt;
  if (sigma < Scalar(0)) throw ValidationError("sigma must be non-negative");
  return std_normal_cdf((a + b * mu) / sqrt(Scalar(1) + b * b * sigma * sigma));
}

template <typename Scalar>
std::array<Scalar, 3> correct_spec_probit(const ProbitDgpCoefficients<Scalar>& beta) {
  return {beta.beta0, beta.beta1, beta.beta2};
}

/// Attenuated coefficients of the probit model fitted on X1 alone.
template <typename Scalar>
ProbitShortCoefficients<Scalar> omitted_coefficients_probit(const ProbitDgpCoefficients<Scalar>& beta,
                                                            Scalar mu2, Scalar sigma2) {
  using std::sqrt;
  if (!(sigma2 > Scalar(0))) throw ValidationError("sigma2 must be positive");
  const Scalar scale = sqrt(Scalar(1) + beta.beta2 * beta.beta2 * sigma2 * sigma2);
  return {(beta.beta0 + beta.beta2 * mu2) / scale, beta.beta1 / scale};
}

inline constexpr double kProbitAssumptionTolerance = 1e-10;

/// Checks independence of X1 and X2 within each group and equal Var(X2|A=a).
/// Throws PreconditionError naming every violated assumption.
template <typename Scalar>
void check_probit_assumptions(const MixtureSpec<Scalar>& spec) {
  validate(spec);
  std::string failed;
  for (int a = 0; a < 2; ++a) {
    if (std::abs(static_cast<double>(spec.groups[a].covariance(0, 1))) > kProbitAssumptionTolerance) {
      failed += (failed.empty() ? "" : "; ") + std::string("Cov(X1, X2 | A=") +
                std::to_string(a) + ") != 0";
    }
  }
  const double v0 = static_cast<double>(spec.groups[0].covariance(1, 1));
  const double v1 = static_cast<double>(spec.groups[1].covariance(1, 1));
  if (std::abs(v0 - v1) > kProbitAssumptionTolerance) {
    failed += (failed.empty() ? "" : "; ") + std::string("Var(X2 | A=0) != Var(X2 | A=1)");
  }
  if (!failed.empty()) throw PreconditionError("probit closed form requires: " + failed);
}

/// Error of the X1-only probit model for one group with E(X1|A=a) = mu1a,
/// Var(X1|A=a) = var1a, E(X2|A=a) = mu2a, pooled E(X2) = mu2 and common
/// Var(X2|A=a) = var2.
template <typename Scalar>
Scalar probit_group_error(const ProbitDgpCoefficients<Scalar>& beta, Scalar mu1a, Scalar var1a,
                          Scalar mu2a, Scalar mu2, Scalar var2) {
  using std::sqrt;
  const Scalar s = sqrt(Scalar(1) + beta.beta1 * beta.beta1 * var1a + beta.beta2 * beta.beta2 * var2);
  const Scalar base = beta.beta0 + beta.beta1 * mu1a;
  return std_normal_cdf((base + beta.beta2 * mu2) / s) - std_normal_cdf((base + beta.beta2 * mu2a) / s);
}

/// Group mean errors of the X1-only probit model against the true risk:
///   b_a = Phi((b0 + b1 mu1a + b2 mu2) / s_a) - Phi((b0 + b1 mu1a + b2 mu2a) / s_a),
///   s_a = sqrt(1 + b1^2 sigma1a^2 + b2^2 sigma2^2),
/// where mu2 is the pooled mean of X2 and sigma2^2 the common within-group
/// variance. b_pop is the weighted combination of the group values.
template <typename Scalar>
GroupErrorPrediction<Scalar> omitted_group_errors_probit(const ProbitDgpCoefficients<Scalar>& beta,
                                                         const MixtureSpec<Scalar>& spec) {
  check_probit_assumptions(spec);
  const Scalar mu2 = pooled_moments(spec).e_x2;
  const Scalar var2 = spec.groups[0].covariance(1, 1);
  std::array<Scalar, 2> b{};
  for (int a = 0; a < 2; ++a) {
    const auto& g = spec.groups[a];
    b[a] = probit_group_error(beta, g.mean(0), g.covariance(0, 0), g.mean(1), mu2, var2);
  }
  GroupErrorPrediction<Scalar> out;
  out.b_group0 = b[0];
  out.b_group1 = b[1];
  out.b_pop = spec.weight(0) * b[0] + spec.weight(1) * b[1];
  out.tau = b[1] - b[0];
  return out;
}

using ProbitBeta = ProbitDgpCoefficients<double>;
using ProbitShort = ProbitShortCoefficients<double>;

}  // namespace misspec

#endif  // MISSPEC_ANALYTIC_PROBIT_HPP
