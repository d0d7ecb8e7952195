#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "misspec/dgp.hpp"
#include "misspec/rng.hpp"
#include "oracles.hpp"

using namespace misspec;

namespace {

DgpSpec table_spec(OutcomeFamily family, Eigen::Index n_per_group) {
  DgpSpec spec;
  spec.family = family;
  spec.beta = Vec(beta_length(family));
  if (family == OutcomeFamily::polynomial) {
    spec.beta << -2.0, 1.0, 1.0, 1.0, 1.0, -1.0;
  } else {
    spec.beta << -2.0, 1.0, 1.0;
  }
  spec.mixture = table1_mixture();
  spec.n_per_group = n_per_group;
  return spec;
}

oracle::MeanSe mean_se(const Vec& v) {
  return oracle::mean_se(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

TEST_CASE("logistic CDF") {
  CHECK(logistic_cdf(0.0) == 0.5);
  const double tiny = logistic_cdf(-745.0);
  CHECK(tiny > 0.0);
  CHECK(tiny <= 1e-300);
  CHECK(std::abs(logistic_cdf(2.0) - 0.88079707797788244406) <= 1e-15);
  CHECK(logistic_cdf(700.0) == 1.0);
  CHECK(std::isfinite(log_logistic_cdf(-700.0)));
  double previous = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double x = -20.0 + 0.02 * k;
    CHECK(std::abs(logistic_cdf(x) + logistic_cdf(-x) - 1.0) <= 1e-14);
    CHECK(logistic_cdf(x) > previous);
    previous = logistic_cdf(x);
  }
}

TEST_CASE("counter RNG is addressable and well spread") {
  CounterRng a(5), b(5);
  for (int k = 0; k < 10; ++k) CHECK(a() == b());
  CounterRng c(5, 3);
  CounterRng d(5);
  d();
  d();
  d();
  CHECK(c() == d());
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CounterRng u(9);
  for (int k = 0; k < 10000; ++k) {
    const auto v = u.below(7);
    CHECK(v < 7);
  }
}

TEST_CASE("linear outcome mean matches moment arithmetic") {
  const auto data = generate(table_spec(OutcomeFamily::linear, 10000), 1);
  CHECK_FALSE(data.is_classification());
  // E Y = -2 + E X1 + E X2 = 1; Var Y = Var X1 + Var X2 + 2 Cov + 1 = 4.
  const double se = std::sqrt(4.0) / std::sqrt(20000.0);
  CHECK(std::abs(data.y.mean() - 1.0) <= 4.0 * se);
  CHECK(data.count(0) == 10000);
  CHECK(data.count(1) == 10000);
  CHECK((data.a.head(10000).array() == 0).all());
  CHECK((data.a.tail(10000).array() == 1).all());
}

TEST_CASE("null probit outcome") {
  auto spec = table_spec(OutcomeFamily::probit, 5000);
  spec.beta.setZero();
  const auto data = generate(spec, 2);
  REQUIRE(data.is_classification());
  CHECK((data.y.array() == 0.5).all());
  const auto z = mean_se(*data.z);
  CHECK(std::abs(z.mean - 0.5) <= 4.0 * z.se);
}

TEST_CASE("polynomial outcome group mean") {
  const auto data = generate(table_spec(OutcomeFamily::polynomial, 100000), 3);
  // Group 0: -2 + 1 + 1 + E X1^2 + E X2^2 - E X1X2 = -2 + 1 + 1 + 2 + 2 - 1.5.
  const auto g0 = mean_se(data.y.head(100000));
  CHECK(std::abs(g0.mean - 2.5) <= 4.0 * g0.se);
}

TEST_CASE("generation is deterministic in the seed") {
  for (auto family : {OutcomeFamily::linear, OutcomeFamily::logit}) {
    const auto spec = table_spec(family, 500);
    const auto a = generate(spec, 99);
    const auto b = generate(spec, 99);
    const auto c = generate(spec, 100);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.a == b.a);
    CHECK(a.x != c.x);
    if (a.z) CHECK(*a.z == *b.z);
  }
}

TEST_CASE("group feature distributions match the spec") {
  const auto spec = table_spec(OutcomeFamily::linear, 100000);
  const auto data = generate(spec, 4);
  for (int g = 0; g < 2; ++g) {
    const auto& group = spec.mixture.groups[g];
    const Eigen::MatrixX2d x = data.x.middleRows(g * 100000, 100000);
    const Eigen::RowVector2d mean = x.colwise().mean();
    const Eigen::MatrixX2d centred = x.rowwise() - mean;
    const Eigen::Matrix2d cov = centred.transpose() * centred / 99999.0;
    for (int k = 0; k < 2; ++k) {
      CHECK(std::abs(mean(k) - group.mean(k)) <= 4.0 * std::sqrt(group.covariance(k, k) / 1e5));
    }
    // SE of a sample covariance entry: sqrt((s_ii s_jj + s_ij^2) / n).
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double se = std::sqrt((group.covariance(i, i) * group.covariance(j, j) +
                                     group.covariance(i, j) * group.covariance(i, j)) / 1e5);
        CHECK(std::abs(cov(i, j) - group.covariance(i, j)) <= 4.0 * se);
      }
    }
  }
}

TEST_CASE("Bernoulli draws are calibrated to the true risk") {
  for (auto family : {OutcomeFamily::probit, OutcomeFamily::logit}) {
    const auto data = generate(table_spec(family, 50000), 5);
    CHECK((data.y.array() >= 0.0).all());
    CHECK((data.y.array() <= 1.0).all());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](auto l, auto r) { return data.y(l) < data.y(r); });
    const std::size_t bin = order.size() / 10;
    for (std::size_t d = 0; d < 10; ++d) {
      double z = 0.0, y = 0.0, var = 0.0;
      for (std::size_t k = d * bin; k < (d + 1) * bin; ++k) {
        z += (*data.z)(order[k]);
        y += data.y(order[k]);
        var += data.y(order[k]) * (1.0 - data.y(order[k]));
      }
      const double se = std::sqrt(var) / static_cast<double>(bin);
      CHECK(std::abs(z / bin - y / bin) <= 4.0 * se + 1e-12);
    }
  }
}

TEST_CASE("regression noise is independent of the features") {
  for (auto family : {OutcomeFamily::linear, OutcomeFamily::polynomial}) {
    const auto spec = table_spec(family, 50000);
    const auto data = generate(spec, 6);
    Vec noise(data.size());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      noise(i) = data.y(i) - systematic_part(spec, data.x(i, 0), data.x(i, 1));
    }
    const double n = static_cast<double>(data.size());
    for (int k = 0; k < 2; ++k) {
      const Vec xc = data.x.col(k).array() - data.x.col(k).mean();
      const Vec ec = noise.array() - noise.mean();
      const double corr = xc.dot(ec) / std::sqrt(xc.squaredNorm() * ec.squaredNorm());
      CHECK(std::abs(corr) <= 4.0 / std::sqrt(n));
    }
    const auto m = mean_se(noise);
    CHECK(std::abs(m.mean) <= 4.0 * m.se);
  }
}

TEST_CASE("spec validation") {
  auto spec = table_spec(OutcomeFamily::linear, 10);
  spec.beta = Vec::Zero(6);
  CHECK_THROWS_AS(generate(spec, 1), ValidationError);
  spec = table_spec(OutcomeFamily::polynomial, 10);
  spec.beta = Vec::Zero(3);
  CHECK_THROWS_AS(generate(spec, 1), ValidationError);
  spec = table_spec(OutcomeFamily::linear, 0);
  CHECK_THROWS_AS(generate(spec, 1), ValidationError);
  spec = table_spec(OutcomeFamily::linear, 10);
  spec.mixture.groups[0].covariance << 1.0, 3.0, 3.0, 1.0;
  CHECK_THROWS_AS(generate(spec, 1), ValidationError);
}

TEST_CASE("Cholesky factor of degenerate covariances") {
  Eigen::Matrix2d s;
  s << 1.0, 1.0, 1.0, 1.0;
  const auto l = cholesky2(s);
  CHECK((l * l.transpose() - s).norm() <= 1e-15);
  s << 0.0, 0.0, 0.0, 2.0;
  const auto l2 = cholesky2(s);
  CHECK((l2 * l2.transpose() - s).norm() <= 1e-15);
  s << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(cholesky2(s), ValidationError);
}

TEST_CASE("CSV export and import") {
  for (auto family : {OutcomeFamily::linear, OutcomeFamily::probit}) {
    const auto data = generate(table_spec(family, 50), 7);
    std::stringstream buffer;
    write_csv(data, buffer);
    const std::string text = buffer.str();
    CHECK(text.rfind("x1,x2,a,y,z\n", 0) == 0);
    const auto back = read_csv(buffer);
    CHECK(back.x == data.x);
    CHECK(back.y == data.y);
    CHECK(back.a == data.a);
    CHECK(back.is_classification() == data.is_classification());
    if (data.z) CHECK(*back.z == *data.z);
  }
  std::stringstream bad("a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(read_csv(bad), ConfigError);
}
