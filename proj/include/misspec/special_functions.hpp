#ifndef MISSPEC_SPECIAL_FUNCTIONS_HPP
#define MISSPEC_SPECIAL_FUNCTIONS_HPP

#include <cmath>
#include <numbers>

namespace misspec {

/// Standard normal CDF through the complementary error function, so both
/// tails keep full relative precision.
template <typename Scalar>
Scalar std_normal_cdf(Scalar x) {
  using std::erfc;
  return Scalar(0.5) * erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

template <typename Scalar>
Scalar std_normal_pdf(Scalar x) {
  using std::exp;
  return exp(Scalar(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<Scalar> /
         std::numbers::sqrt2_v<Scalar>;
}

inline constexpr double kMillsSwitch = 8.0;

/// Mills ratio Phi(-t) / phi(t) for t >= kMillsSwitch by Laplace's continued
/// fraction 1/(t + 1/(t + 2/(t + 3/(t + ...)))), evaluated bottom-up.
template <typename Scalar>
Scalar upper_mills_ratio(Scalar t) {
  Scalar tail = t;
  for (int k = 60; k >= 1; --k) tail = t + Scalar(k) / tail;
  return Scalar(1) / tail;
}

/// log Phi(x). Below -kMillsSwitch the CDF is assembled from the Mills ratio.
template <typename Scalar>
Scalar log_std_normal_cdf(Scalar x) {
  using std::log;
  if (x < Scalar(-kMillsSwitch)) {
    return Scalar(-0.5) * x * x - Scalar(0.5) * log(Scalar(2) * std::numbers::pi_v<Scalar>) +
           log(upper_mills_ratio(-x));
  }
  return log(std_normal_cdf(x));
}

/// phi(x) / Phi(x), guarded against 0/0 in the lower tail.
template <typename Scalar>
Scalar inverse_mills_ratio(Scalar x) {
  if (x < Scalar(-kMillsSwitch)) return Scalar(1) / upper_mills_ratio(-x);
  return std_normal_pdf(x) / std_normal_cdf(x);
}

/// Standard logistic CDF 1 / (1 + exp(-x)), evaluated on the side where the
/// exponential cannot overflow.
template <typename Scalar>
Scalar logistic_cdf(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar ex = exp(x);
  return ex / (Scalar(1) + ex);
}

/// log S(x) = -log(1 + exp(-x)).
template <typename Scalar>
Scalar log_logistic_cdf(Scalar x) {
  using std::exp;
  using std::log1p;
  if (x >= Scalar(0)) return -log1p(exp(-x));
  return x - log1p(exp(x));
}

}  // namespace misspec

#endif  // MISSPEC_SPECIAL_FUNCTIONS_HPP
