#ifndef MISSPEC_ESTIMATORS_HPP
#define MISSPEC_ESTIMATORS_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "misspec/core.hpp"
#include "misspec/dgp.hpp"

namespace misspec {

enum class FeatureSet { both, x1_only };
enum class ModelFamily { ols, probit, logit, forest };
enum class Link { probit, logit };

std::string_view to_string(FeatureSet features);
std::string_view to_string(ModelFamily family);
FeatureSet parse_feature_set(std::string_view name);
ModelFamily parse_model_family(std::string_view name);

struct FitDiagnostics {
  int iterations = 0;
  double gradient_norm = 0.0;  // max-norm of the per-row mean score
  std::vector<double> log_likelihood_trace;  // starting value, then one entry per iteration
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, FitDiagnostics diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const FitDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  FitDiagnostics diagnostics_;
};

class SeparationError : public Error {
 public:
  using Error::Error;
};

struct ForestParams {
  int trees = 100;
  int max_depth = 8;
  Eigen::Index min_leaf = 5;
  double bootstrap_ratio = 1.0;
  int threads = 1;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;
  int left = -1;
  int right = -1;
  Eigen::Index count = 0;  // training (bootstrap) rows reaching the node
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  template <typename Row>
  double predict(const Row& row) const {
    int k = 0;
    while (nodes[k].feature >= 0) {
      k = row(nodes[k].feature) <= nodes[k].threshold ? nodes[k].left : nodes[k].right;
    }
    return nodes[k].value;
  }
};

struct Forest {
  std::vector<RegressionTree> trees;
};

struct FittedModel {
  ModelFamily family = ModelFamily::ols;
  FeatureSet features = FeatureSet::both;
  Vec coefficients;  // intercept first; empty for forests
  std::optional<Forest> forest;
  FitDiagnostics diagnostics;
};

/// Intercept column followed by x1 (and x2 for FeatureSet::both).
Mat design_matrix(const Eigen::MatrixX2d& x, FeatureSet features);

/// Feature columns only, without the intercept.
Mat feature_matrix(const Eigen::MatrixX2d& x, FeatureSet features);

FittedModel fit_ols(const Dataset& data, FeatureSet features);

// Mean (per-row) Bernoulli log-likelihood of a binary response model and
// its first two derivatives in the coefficients.
double log_likelihood(Link link, const Mat& design, const Vec& z, const Vec& coefficients);
Vec score(Link link, const Mat& design, const Vec& z, const Vec& coefficients);
Mat hessian(Link link, const Mat& design, const Vec& z, const Vec& coefficients);

struct MleOptions {
  int max_iterations = 100;
  int max_halvings = 30;
  double step_tolerance = 1e-8;
  double gradient_tolerance = 1e-6;
  double separation_index = 30.0;
};

/// Damped Newton from the zero vector with step halving.
FittedModel fit_binary(Link link, const Dataset& data, FeatureSet features,
                       const MleOptions& options = {});
FittedModel fit_probit(const Dataset& data, FeatureSet features);
FittedModel fit_logit(const Dataset& data, FeatureSet features);

/// Bagged CART regression trees with the variance-reduction criterion.
FittedModel fit_forest(const Dataset& data, FeatureSet features, const ForestParams& params,
                       std::uint64_t seed);

/// Scores on the given feature rows: the linear index for OLS, Phi or S of
/// the index for probit and logit, the tree average for forests.
Vec predict(const FittedModel& model, const Eigen::MatrixX2d& x);

}  // namespace misspec

#endif  // MISSPEC_ESTIMATORS_HPP
