#include "misspec/estimators.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "misspec/special_functions.hpp"

namespace misspec {

std::string_view to_string(FeatureSet features) {
  return features == FeatureSet::both ? "both" : "x1_only";
}

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::ols: return "linear";
    case ModelFamily::probit: return "probit";
    case ModelFamily::logit: return "logit";
    case ModelFamily::forest: return "forest";
  }
  return "unknown";
}

FeatureSet parse_feature_set(std::string_view name) {
  if (name == "both" || name == "x1,x2") return FeatureSet::both;
  if (name == "x1_only" || name == "x1") return FeatureSet::x1_only;
  throw ConfigError("unknown feature set '" + std::string(name) + "'");
}

ModelFamily parse_model_family(std::string_view name) {
  if (name == "linear" || name == "ols") return ModelFamily::ols;
  if (name == "probit") return ModelFamily::probit;
  if (name == "logit" || name == "logistic") return ModelFamily::logit;
  if (name == "forest" || name == "random_forest") return ModelFamily::forest;
  throw ConfigError("unknown model family '" + std::string(name) + "'");
}

Mat feature_matrix(const Eigen::MatrixX2d& x, FeatureSet features) {
  if (features == FeatureSet::both) return x;
  return x.leftCols(1);
}

Mat design_matrix(const Eigen::MatrixX2d& x, FeatureSet features) {
  const Eigen::Index p = features == FeatureSet::both ? 2 : 1;
  Mat design(x.rows(), p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = x.leftCols(p);
  return design;
}

FittedModel fit_ols(const Dataset& data, FeatureSet features) {
  const Mat design = design_matrix(data.x, features);
  if (design.rows() < design.cols()) throw RankDeficiencyError("fewer rows than coefficients");
  Eigen::ColPivHouseholderQR<Mat> qr(design);
  const Mat r = qr.matrixR().topLeftCorner(design.cols(), design.cols()).triangularView<Eigen::Upper>();
  const Vec sv = Eigen::JacobiSVD<Mat>(r).singularValues();
  if (!(sv.maxCoeff() > 0.0) || sv.minCoeff() / sv.maxCoeff() <= 1e-10) {
    throw RankDeficiencyError("design matrix is rank deficient (condition " +
                              std::to_string(sv.minCoeff() / sv.maxCoeff()) + ")");
  }
  FittedModel model;
  model.family = ModelFamily::ols;
  model.features = features;
  model.coefficients = qr.solve(data.y);
  return model;
}

FittedModel fit_probit(const Dataset& data, FeatureSet features) {
  return fit_binary(Link::probit, data, features);
}

FittedModel fit_logit(const Dataset& data, FeatureSet features) {
  return fit_binary(Link::logit, data, features);
}

Vec predict(const FittedModel& model, const Eigen::MatrixX2d& x) {
  if (model.family == ModelFamily::forest) {
    if (!model.forest || model.forest->trees.empty()) throw ValidationError("forest is not fitted");
    const Mat features = feature_matrix(x, model.features);
    Vec out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double sum = 0.0;
      for (const auto& tree : model.forest->trees) sum += tree.predict(features.row(i));
      out(i) = sum / static_cast<double>(model.forest->trees.size());
    }
    return out;
  }
  const Mat design = design_matrix(x, model.features);
  if (design.cols() != model.coefficients.size()) {
    throw ValidationError("coefficient count does not match the feature set");
  }
  Vec index = design * model.coefficients;
  switch (model.family) {
    case ModelFamily::probit: return index.unaryExpr([](double v) { return std_normal_cdf(v); });
    case ModelFamily::logit: return index.unaryExpr([](double v) { return logistic_cdf(v); });
    default: return index;
  }
}

}  // namespace misspec
