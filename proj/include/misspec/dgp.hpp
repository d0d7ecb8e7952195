#ifndef MISSPEC_DGP_HPP
#define MISSPEC_DGP_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "misspec/core.hpp"
#include "misspec/moments.hpp"
#include "misspec/special_functions.hpp"

namespace misspec {

enum class OutcomeFamily { linear, polynomial, probit, logit };

std::string_view to_string(OutcomeFamily family);
OutcomeFamily parse_outcome_family(std::string_view name);

inline bool is_classification(OutcomeFamily f) {
  return f == OutcomeFamily::probit || f == OutcomeFamily::logit;
}

/// Number of coefficients the family expects: b0..b2, or b0..b5 for the
/// polynomial outcome b0 + b1 x1 + b2 x2 + b3 x1^2 + b4 x2^2 + b5 x1 x2.
inline Eigen::Index beta_length(OutcomeFamily f) { return f == OutcomeFamily::polynomial ? 6 : 3; }

struct DgpSpec {
  OutcomeFamily family = OutcomeFamily::linear;
  Vec beta = Vec::Zero(3);
  Mixture mixture;
  Eigen::Index n_per_group = 1;
};

void validate(const DgpSpec& spec);

/// Simulated rows in columnar form. Rows [0, n_per_group) belong to group 0
/// and the rest to group 1. For classification `y` is the true risk and `z`
/// the Bernoulli draw; regression datasets carry no `z`.
struct Dataset {
  Eigen::MatrixX2d x;
  IntVec a;
  Vec y;
  std::optional<Vec> z;

  Eigen::Index size() const { return y.size(); }
  bool is_classification() const { return z.has_value(); }
  Eigen::Index count(int group) const { return (a.array() == group).count(); }
};

/// Noise-free part of the outcome: h(x) for regression, the linear index for
/// classification.
double systematic_part(const DgpSpec& spec, double x1, double x2);

/// Lower Cholesky factor of a 2x2 PSD matrix; a zero pivot is allowed so
/// degenerate (rank-one) covariances still sample.
Eigen::Matrix2d cholesky2(const Eigen::Matrix2d& covariance);

/// Row i draws from its own CounterRng keyed by derive_seed(seed, i), so
/// output is a pure function of (spec, seed) and independent of evaluation order.
Dataset generate(const DgpSpec& spec, std::uint64_t seed);

/// CSV with header `x1,x2,a,y,z`; z is empty for regression rows.
void write_csv(const Dataset& data, std::ostream& out);
Dataset read_csv(std::istream& in);

}  // namespace misspec

#endif  // MISSPEC_DGP_HPP
