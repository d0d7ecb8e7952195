#include "doctest.h"

#include <random>

#include "misspec/moments.hpp"
#include "oracles.hpp"

using namespace misspec;

namespace {

Mixture identity_mixture() {
  Mixture m;
  m.groups[0].mean.setZero();
  m.groups[1].mean.setZero();
  m.groups[0].covariance.setIdentity();
  m.groups[1].covariance.setIdentity();
  m.weight_protected = 0.5;
  return m;
}

Mixture random_mixture(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.2, 2.0), rho(-0.9, 0.9), w(0.0, 1.0);
  Mixture m;
  for (auto& g : m.groups) {
    g.mean << u(gen), u(gen);
    const double s1 = pos(gen), s2 = pos(gen), r = rho(gen);
    g.covariance << s1 * s1, r * s1 * s2, r * s1 * s2, s2 * s2;
  }
  m.weight_protected = w(gen);
  return m;
}

}  // namespace

TEST_CASE("pooled moments of identical standard components") {
  const auto m = pooled_moments(identity_mixture());
  CHECK(m.e_x1 == 0.0);
  CHECK(m.e_x2 == 0.0);
  CHECK(m.var_x1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.var_x2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.cov_x1x2 == 0.0);
}

TEST_CASE("pooled moments of the table configuration") {
  const Mixture spec = table1_mixture();
  const auto m = pooled_moments(spec);
  // Hand computation: E X = (1, 2); between-group spread adds 1 to Var(X2);
  // the within-group covariances +0.5 and -0.5 cancel.
  CHECK(m.e_x1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.e_x2 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.var_x1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.var_x2 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(m.cov_x1x2) < 1e-14);
  CHECK(m.e_x1x2 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.e_x1_sq == doctest::Approx(2.0).epsilon(1e-14));

  // Monte Carlo at n = 10^6 agrees within 3 SE.
  const auto s = oracle::sample_mixture(spec, 500000, 2024);
  auto check = [&](const std::function<double(Eigen::Index)>& f, double expected) {
    std::vector<double> v(static_cast<std::size_t>(s.x.rows()));
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) v[static_cast<std::size_t>(i)] = f(i);
    const auto ms = oracle::mean_se(v);
    CHECK(std::abs(ms.mean - expected) <= 3.0 * ms.se);
  };
  check([&](Eigen::Index i) { return s.x(i, 0); }, m.e_x1);
  check([&](Eigen::Index i) { return s.x(i, 1); }, m.e_x2);
  check([&](Eigen::Index i) { return s.x(i, 0) * s.x(i, 0); }, m.e_x1_sq);
  check([&](Eigen::Index i) { return s.x(i, 1) * s.x(i, 1); }, m.e_x2_sq);
  check([&](Eigen::Index i) { return s.x(i, 0) * s.x(i, 1); }, m.e_x1x2);
}

TEST_CASE("single-component mixture reproduces the component") {
  Mixture spec = table1_mixture();
  spec.weight_protected = 0.0;
  const auto m = pooled_moments(spec);
  CHECK(m.e_x1 == 1.0);
  CHECK(m.e_x2 == 1.0);
  CHECK(m.var_x1 == 1.0);
  CHECK(m.var_x2 == 1.0);
  CHECK(m.cov_x1x2 == 0.5);
  CHECK(m.e_x1x2 == 1.5);

  const auto g = group_moments(spec, 0);
  CHECK(g.e_x1x2 == m.e_x1x2);
  CHECK(g.e_x1_sq == m.e_x1_sq);
}

TEST_CASE("group moments read the displayed parameters") {
  const Mixture spec = table1_mixture();
  const auto g1 = group_moments(spec, 1);
  CHECK(g1.e_x1 == 1.0);
  CHECK(g1.e_x2 == 3.0);
  CHECK(g1.cov_x1x2 == -0.5);
  const auto g0 = group_moments(spec, 0);
  CHECK(g0.e_x2 == 1.0);
  CHECK(g0.cov_x1x2 == 0.5);
  CHECK_THROWS_AS(group_moments(spec, 2), ValidationError);
}

TEST_CASE("validation rejects malformed mixtures") {
  Mixture spec = table1_mixture();
  SUBCASE("non-PSD covariance") {
    spec.groups[1].covariance << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(pooled_moments(spec), ValidationError);
  }
  SUBCASE("asymmetric covariance") {
    spec.groups[0].covariance(0, 1) = 0.1;
    CHECK_THROWS_AS(pooled_moments(spec), ValidationError);
  }
  SUBCASE("non-finite mean") {
    spec.groups[0].mean(0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(pooled_moments(spec), ValidationError);
  }
  SUBCASE("weight outside [0, 1]") {
    spec.weight_protected = 1.5;
    CHECK_THROWS_AS(pooled_moments(spec), ValidationError);
  }
  SUBCASE("rounding-level negative eigenvalue is accepted") {
    spec.groups[0].covariance << 1.0, 1.0, 1.0, 1.0 - 1e-12;
    CHECK_NOTHROW(pooled_moments(spec));
  }
}

TEST_CASE("mixture identities hold for random specs") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Mixture spec = random_mixture(gen);
    const auto m = pooled_moments(spec);
    const double p1 = spec.weight_protected, p0 = 1.0 - p1;
    const auto& g0 = spec.groups[0];
    const auto& g1 = spec.groups[1];
    CHECK(std::abs(m.e_x1 - (p0 * g0.mean(0) + p1 * g1.mean(0))) <= 1e-12);
    CHECK(std::abs(m.e_x2 - (p0 * g0.mean(1) + p1 * g1.mean(1))) <= 1e-12);
    const double total_var = p0 * g0.covariance(0, 0) + p1 * g1.covariance(0, 0) +
                             p0 * std::pow(g0.mean(0) - m.e_x1, 2) +
                             p1 * std::pow(g1.mean(0) - m.e_x1, 2);
    CHECK(std::abs(m.var_x1 - total_var) <= 1e-12);
    CHECK(std::abs(m.var_x1 - (m.e_x1_sq - m.e_x1 * m.e_x1)) <= 1e-10);
    CHECK(std::abs(m.cov_x1x2 - (m.e_x1x2 - m.e_x1 * m.e_x2)) <= 1e-10);
    CHECK(m.cov_x1x2 * m.cov_x1x2 <= m.var_x1 * m.var_x2 * (1.0 + 1e-12));

    Mixture one = spec;
    one.weight_protected = 1.0;
    const auto a = pooled_moments(one);
    const auto b = group_moments(one, 1);
    CHECK(a.e_x1 == b.e_x1);
    CHECK(a.var_x2 == b.var_x2);
    CHECK(a.e_x1x2 == b.e_x1x2);
  }
}

TEST_CASE("sample moments agree with pooled moments") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 5; ++trial) {
    Mixture spec = random_mixture(gen);
    spec.weight_protected = 0.5;
    const auto m = pooled_moments(spec);
    const auto s = oracle::sample_mixture(spec, 50000, 100 + static_cast<std::uint64_t>(trial));
    std::vector<double> x1(static_cast<std::size_t>(s.x.rows())), x1x2(x1.size());
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
      x1[static_cast<std::size_t>(i)] = s.x(i, 0);
      x1x2[static_cast<std::size_t>(i)] = s.x(i, 0) * s.x(i, 1);
    }
    const auto a = oracle::mean_se(x1);
    const auto b = oracle::mean_se(x1x2);
    CHECK(std::abs(a.mean - m.e_x1) <= 4.0 * a.se);
    CHECK(std::abs(b.mean - m.e_x1x2) <= 4.0 * b.se);
  }
}

TEST_CASE("moments templated on long double") {
  MixtureSpec<long double> spec;
  spec.groups[0].mean << 1.0L, 1.0L;
  spec.groups[1].mean << 1.0L, 3.0L;
  const auto m = pooled_moments(spec);
  CHECK(static_cast<double>(m.var_x2) == doctest::Approx(2.0));
}
