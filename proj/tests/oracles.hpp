// Test-only reference computations. Nothing here calls into the library's
// sampling, fitting or closed-form code.
#ifndef MISSPEC_TESTS_ORACLES_HPP
#define MISSPEC_TESTS_ORACLES_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "misspec/moments.hpp"

namespace oracle {

struct Sample {
  Eigen::MatrixX2d x;
  Eigen::VectorXi a;
};

/// Mixture draws with std::mt19937_64 and Eigen's LLT.
inline Sample sample_mixture(const misspec::Mixture& spec, Eigen::Index n_per_group, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Sample s;
  s.x.resize(2 * n_per_group, 2);
  s.a.resize(2 * n_per_group);
  for (int g = 0; g < 2; ++g) {
    const Eigen::Matrix2d l = spec.groups[g].covariance.llt().matrixL();
    for (Eigen::Index i = 0; i < n_per_group; ++i) {
      const Eigen::Index row = g * n_per_group + i;
      const Eigen::Vector2d z(normal(gen), normal(gen));
      s.x.row(row) = (spec.groups[g].mean + l * z).transpose();
      s.a(row) = g;
    }
  }
  return s;
}

struct LeastSquares {
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  Eigen::VectorXd residual;  // fitted - y
};

/// Normal equations via LDLT with classical standard errors.
inline LeastSquares least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd xtx = design.transpose() * design;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  LeastSquares out;
  out.coef = ldlt.solve(design.transpose() * y);
  out.residual = design * out.coef - y;
  const double sigma2 = out.residual.squaredNorm() / static_cast<double>(design.rows() - design.cols());
  const Eigen::MatrixXd cov = sigma2 * ldlt.solve(Eigen::MatrixXd::Identity(xtx.rows(), xtx.cols()));
  out.se = cov.diagonal().cwiseSqrt();
  return out;
}

struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

/// Gauss-Hermite rule for weight exp(-t^2) by Golub-Welsch.
struct GaussHermite {
  Eigen::VectorXd nodes, weights;

  explicit GaussHermite(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    nodes = eig.eigenvalues();
    weights = std::sqrt(std::numbers::pi) * eig.eigenvectors().row(0).array().square().transpose();
  }

  /// E f(X) for X ~ N(mu, sigma^2).
  double expectation(const std::function<double(double)>& f, double mu, double sigma) const {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < nodes.size(); ++k) {
      sum += weights(k) * f(mu + std::numbers::sqrt2 * sigma * nodes(k));
    }
    return sum / std::sqrt(std::numbers::pi);
  }
};

/// Normal CDF by the error function, kept separate from the library path.
inline double phi_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)); }

/// E Phi(a + b X), X ~ N(mu, sigma^2), by Gauss-Hermite quadrature. With
/// c = a + b mu and d = |b| sigma, E_Z Phi(c + d Z) = E_e Phi((c - e) / d)
/// (both equal P(e - d Z <= c)), so the rule is applied to whichever form
/// has slope at most one and the integrand stays smooth.
inline double expected_phi(const GaussHermite& rule, double a, double b, double mu, double sigma) {
  const double c = a + b * mu;
  const double d = std::abs(b) * sigma;
  if (d <= 1.0) return rule.expectation([&](double z) { return phi_cdf(c + d * z); }, 0.0, 1.0);
  return rule.expectation([&](double e) { return phi_cdf((c - e) / d); }, 0.0, 1.0);
}

/// Binary-response fit to fractional targets in [0, 1] by iteratively
/// reweighted least squares. Logit uses its canonical weights; probit uses
/// Fisher scoring with weights phi^2 / (p (1 - p)).
inline Eigen::VectorXd irls(bool probit, const Eigen::MatrixXd& design, const Eigen::VectorXd& target) {
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(design.cols());
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd eta = design * coef;
    Eigen::VectorXd w(eta.size()), working(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      double p, dp;
      if (probit) {
        p = phi_cdf(eta(i));
        dp = std::exp(-0.5 * eta(i) * eta(i)) / std::sqrt(2.0 * std::numbers::pi);
      } else {
        p = 1.0 / (1.0 + std::exp(-eta(i)));
        dp = p * (1.0 - p);
      }
      p = std::clamp(p, 1e-300, 1.0 - 1e-16);
      dp = std::max(dp, 1e-300);
      w(i) = dp * dp / (p * (1.0 - p));
      working(i) = eta(i) + (target(i) - p) / dp;
    }
    const Eigen::MatrixXd xtw = design.transpose() * w.asDiagonal();
    const Eigen::VectorXd next = (xtw * design).ldlt().solve(xtw * working);
    const double move = (next - coef).lpNorm<Eigen::Infinity>();
    coef = next;
    if (move < 1e-12) break;
  }
  return coef;
}

}  // namespace oracle

#endif
