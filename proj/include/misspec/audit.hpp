#ifndef MISSPEC_AUDIT_HPP
#define MISSPEC_AUDIT_HPP

#include <array>
#include <string_view>

#include "misspec/analytic_linear.hpp"
#include "misspec/core.hpp"

namespace misspec {

/// Empirical mean prediction errors e = prediction - truth, overall and per
/// group, with standard errors sd / sqrt(n).
struct ErrorReport {
  double b_pop = 0, b_group0 = 0, b_group1 = 0, tau = 0;
  double se_pop = 0, se_group0 = 0, se_group1 = 0, se_tau = 0;
  Eigen::Index n_pop = 0, n_group0 = 0, n_group1 = 0;
};

/// For classification pass the true risk as `truths`, not the Bernoulli draw.
ErrorReport error_report(const Vec& predictions, const Vec& truths, const IntVec& groups);

/// True when b_pop * n_pop equals the group-weighted sum within
/// tolerance * n_pop.
bool total_probability_holds(const ErrorReport& report, double tolerance = 1e-9);

enum class Verdict { consistent, inconsistent };
std::string_view to_string(Verdict verdict);

enum class Statistic { b_pop = 0, b_group0 = 1, b_group1 = 2, tau = 3 };
inline constexpr std::array<std::string_view, 4> kStatisticNames{"b_pop", "b_group0", "b_group1",
                                                                 "tau"};

struct StatisticComparison {
  double analytic = 0, empirical = 0, se = 0, z = 0;
  Verdict verdict = Verdict::consistent;
};

struct Comparison {
  GroupErrors analytic;
  ErrorReport empirical;
  double z_threshold = 4.0;
  std::array<StatisticComparison, 4> statistics;

  const StatisticComparison& operator[](Statistic s) const {
    return statistics[static_cast<std::size_t>(s)];
  }
  bool all_consistent() const;
};

struct CompareOptions {
  double z_threshold = 4.0;
  // Known approximation error of the closed form, added to each SE in quadrature.
  double model_tolerance = 0.0;
  // Differences at or below this level are rounding, not signal.
  double absolute_floor = 1e-10;
};

/// z = (empirical - analytic) / sqrt(se^2 + model_tolerance^2), with the
/// difference first shrunk toward zero by absolute_floor. Consistent iff
/// |z| <= z_threshold.
Comparison compare(const GroupErrors& analytic, const ErrorReport& empirical,
                   const CompareOptions& options = {});

}  // namespace misspec

#endif  // MISSPEC_AUDIT_HPP
