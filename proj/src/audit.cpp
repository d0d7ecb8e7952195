#include "misspec/audit.hpp"

#include <cmath>
#include <limits>

namespace misspec {

namespace {

// Neumaier-compensated running sum; rows are always added in index order.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  Eigen::Index n = 0;
};

template <typename Select>
MeanSe mean_se(const Vec& e, Select&& select) {
  CompensatedSum sum;
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (!select(i)) continue;
    sum.add(e(i));
    ++n;
  }
  MeanSe out;
  out.n = n;
  if (n == 0) return out;
  out.mean = sum.value() / static_cast<double>(n);
  CompensatedSum ss;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (!select(i)) continue;
    const double d = e(i) - out.mean;
    ss.add(d * d);
  }
  if (n > 1) {
    out.se = std::sqrt(ss.value() / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return out;
}

}  // namespace

ErrorReport error_report(const Vec& predictions, const Vec& truths, const IntVec& groups) {
  if (predictions.size() != truths.size() || predictions.size() != groups.size()) {
    throw ValidationError("predictions, truths and groups must have equal length");
  }
  if (((groups.array() != 0) && (groups.array() != 1)).any()) {
    throw ValidationError("group labels must be 0 or 1");
  }
  const Vec e = predictions - truths;
  const auto all = mean_se(e, [](Eigen::Index) { return true; });
  const auto g0 = mean_se(e, [&](Eigen::Index i) { return groups(i) == 0; });
  const auto g1 = mean_se(e, [&](Eigen::Index i) { return groups(i) == 1; });
  if (g0.n == 0 || g1.n == 0) {
    throw EmptyGroupError(std::string("group ") + (g0.n == 0 ? "0" : "1") + " has no rows");
  }
  ErrorReport r;
  r.b_pop = all.mean;
  r.b_group0 = g0.mean;
  r.b_group1 = g1.mean;
  r.tau = g1.mean - g0.mean;
  r.se_pop = all.se;
  r.se_group0 = g0.se;
  r.se_group1 = g1.se;
  r.se_tau = std::hypot(g0.se, g1.se);
  r.n_pop = all.n;
  r.n_group0 = g0.n;
  r.n_group1 = g1.n;
  return r;
}

bool total_probability_holds(const ErrorReport& r, double tolerance) {
  const double n = static_cast<double>(r.n_pop);
  const double recombined = r.b_group0 * static_cast<double>(r.n_group0) +
                            r.b_group1 * static_cast<double>(r.n_group1);
  return std::abs(r.b_pop * n - recombined) <= tolerance * n;
}

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::consistent ? "consistent" : "inconsistent";
}

bool Comparison::all_consistent() const {
  for (const auto& s : statistics) {
    if (s.verdict != Verdict::consistent) return false;
  }
  return true;
}

Comparison compare(const GroupErrors& analytic, const ErrorReport& empirical,
                   const CompareOptions& options) {
  Comparison c;
  c.analytic = analytic;
  c.empirical = empirical;
  c.z_threshold = options.z_threshold;
  const std::array<double, 4> a{analytic.b_pop, analytic.b_group0, analytic.b_group1, analytic.tau};
  const std::array<double, 4> e{empirical.b_pop, empirical.b_group0, empirical.b_group1,
                                empirical.tau};
  const std::array<double, 4> se{empirical.se_pop, empirical.se_group0, empirical.se_group1,
                                 empirical.se_tau};
  for (std::size_t k = 0; k < 4; ++k) {
    auto& s = c.statistics[k];
    s.analytic = a[k];
    s.empirical = e[k];
    s.se = std::hypot(se[k], options.model_tolerance);
    const double diff = e[k] - a[k];
    const double excess = std::max(std::abs(diff) - options.absolute_floor, 0.0);
    if (excess == 0.0) {
      s.z = 0.0;
    } else if (s.se > 0.0) {
      s.z = std::copysign(excess / s.se, diff);
    } else {
      s.z = std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    s.verdict = std::abs(s.z) <= options.z_threshold ? Verdict::consistent : Verdict::inconsistent;
  }
  return c;
}

}  // namespace misspec
