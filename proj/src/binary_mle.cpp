#include <Eigen/Cholesky>

#include <cmath>
#include <string>

#include "misspec/estimators.hpp"
#include "misspec/special_functions.hpp"

namespace misspec {

namespace {

struct RowTerms {
  double log_lik;
  double d1;  // d log_lik / d index
  double d2;  // d^2 log_lik / d index^2
};

// Probit derivatives go through the inverse Mills ratio lambda(t) = phi(t)/Phi(t),
// with lambda'(t) = -lambda(t) (t + lambda(t)).
RowTerms probit_terms(double index, double z) {
  const double t = z > 0.5 ? index : -index;
  const double lambda = inverse_mills_ratio(t);
  const double sign = z > 0.5 ? 1.0 : -1.0;
  return {log_std_normal_cdf(t), sign * lambda, -lambda * (t + lambda)};
}

RowTerms logit_terms(double index, double z) {
  const double p = logistic_cdf(index);
  const double ll = z > 0.5 ? log_logistic_cdf(index) : log_logistic_cdf(-index);
  return {ll, z - p, -p * (1.0 - p)};
}

RowTerms terms(Link link, double index, double z) {
  return link == Link::probit ? probit_terms(index, z) : logit_terms(index, z);
}

void check_shapes(const Mat& design, const Vec& z, const Vec& coefficients) {
  if (design.rows() != z.size() || design.cols() != coefficients.size() || design.rows() == 0) {
    throw ValidationError("design, response and coefficient shapes disagree");
  }
}

}  // namespace

double log_likelihood(Link link, const Mat& design, const Vec& z, const Vec& coefficients) {
  check_shapes(design, z, coefficients);
  const Vec index = design * coefficients;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < index.size(); ++i) sum += terms(link, index(i), z(i)).log_lik;
  return sum / static_cast<double>(index.size());
}

Vec score(Link link, const Mat& design, const Vec& z, const Vec& coefficients) {
  check_shapes(design, z, coefficients);
  const Vec index = design * coefficients;
  Vec d1(index.size());
  for (Eigen::Index i = 0; i < index.size(); ++i) d1(i) = terms(link, index(i), z(i)).d1;
  return design.transpose() * d1 / static_cast<double>(index.size());
}

Mat hessian(Link link, const Mat& design, const Vec& z, const Vec& coefficients) {
  check_shapes(design, z, coefficients);
  const Vec index = design * coefficients;
  Vec d2(index.size());
  for (Eigen::Index i = 0; i < index.size(); ++i) d2(i) = terms(link, index(i), z(i)).d2;
  return design.transpose() * d2.asDiagonal() * design / static_cast<double>(index.size());
}

FittedModel fit_binary(Link link, const Dataset& data, FeatureSet features,
                       const MleOptions& options) {
  if (!data.z) throw ValidationError("binary model needs a classification dataset");
  const Vec& z = *data.z;
  const double ones = z.sum();
  if (ones <= 0.0 || ones >= static_cast<double>(z.size())) {
    throw SeparationError("response has a single class; the likelihood has no maximum");
  }
  const Mat design = design_matrix(data.x, features);
  const std::string name(link == Link::probit ? "probit" : "logit");

  Vec coef = Vec::Zero(design.cols());
  double ll = log_likelihood(link, design, z, coef);
  FitDiagnostics diag;
  diag.log_likelihood_trace.push_back(ll);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const Vec grad = score(link, design, z, coef);
    const Mat info = -hessian(link, design, z, coef);
    Eigen::LDLT<Mat> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      diag.gradient_norm = grad.lpNorm<Eigen::Infinity>();
      throw ConvergenceError(name + ": information matrix is not positive definite", diag);
    }
    const Vec step = ldlt.solve(grad);
    double scale = 1.0;
    Vec trial = coef + step;
    double trial_ll = log_likelihood(link, design, z, trial);
    int halvings = 0;
    while (!(trial_ll >= ll) && halvings < options.max_halvings) {
      scale *= 0.5;
      ++halvings;
      trial = coef + scale * step;
      trial_ll = log_likelihood(link, design, z, trial);
    }
    if (!(trial_ll >= ll)) {
      // No ascent along the Newton direction: the iterate is already optimal
      // to working precision.
      diag.iterations = iter;
      break;
    }
    if (scale == 1.0 && (design * trial).lpNorm<Eigen::Infinity>() > options.separation_index) {
      diag.gradient_norm = grad.lpNorm<Eigen::Infinity>();
      throw SeparationError(name + ": linear index exceeded " +
                            std::to_string(options.separation_index) +
                            " after a full Newton step; the classes look separable");
    }
    const double moved = (scale * step).lpNorm<Eigen::Infinity>();
    coef = trial;
    ll = trial_ll;
    diag.iterations = iter;
    diag.log_likelihood_trace.push_back(ll);
    const double grad_norm = score(link, design, z, coef).lpNorm<Eigen::Infinity>();
    // A small score alone also occurs far out along a separating direction, so
    // it only ends the iteration once the Newton steps have become small.
    if (moved < options.step_tolerance ||
        (grad_norm < options.gradient_tolerance && moved < 1e-4)) {
      break;
    }
    if (iter == options.max_iterations) {
      diag.gradient_norm = grad_norm;
      throw ConvergenceError(name + ": no convergence after " +
                                 std::to_string(options.max_iterations) + " iterations",
                             diag);
    }
  }

  diag.gradient_norm = score(link, design, z, coef).lpNorm<Eigen::Infinity>();
  if (diag.gradient_norm > options.gradient_tolerance) {
    throw ConvergenceError(name + ": stopped with score max-norm " +
                               std::to_string(diag.gradient_norm),
                           diag);
  }
  FittedModel model;
  model.family = link == Link::probit ? ModelFamily::probit : ModelFamily::logit;
  model.features = features;
  model.coefficients = coef;
  model.diagnostics = std::move(diag);
  return model;
}

}  // namespace misspec
