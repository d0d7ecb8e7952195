#include "misspec/dgp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "misspec/rng.hpp"

namespace misspec {

std::string_view to_string(OutcomeFamily family) {
  switch (family) {
    case OutcomeFamily::linear: return "linear";
    case OutcomeFamily::polynomial: return "polynomial";
    case OutcomeFamily::probit: return "probit";
    case OutcomeFamily::logit: return "logit";
  }
  return "unknown";
}

OutcomeFamily parse_outcome_family(std::string_view name) {
  if (name == "linear") return OutcomeFamily::linear;
  if (name == "polynomial") return OutcomeFamily::polynomial;
  if (name == "probit") return OutcomeFamily::probit;
  if (name == "logit" || name == "logistic") return OutcomeFamily::logit;
  throw ConfigError("unknown outcome family '" + std::string(name) + "'");
}

void validate(const DgpSpec& spec) {
  if (spec.beta.size() != beta_length(spec.family)) {
    throw ValidationError(std::string(to_string(spec.family)) + " outcome needs " +
                          std::to_string(beta_length(spec.family)) + " coefficients, got " +
                          std::to_string(spec.beta.size()));
  }
  if (!spec.beta.allFinite()) throw ValidationError("non-finite coefficient");
  if (spec.n_per_group < 1) throw ValidationError("n_per_group must be at least 1");
  validate(spec.mixture);
}

double systematic_part(const DgpSpec& spec, double x1, double x2) {
  const Vec& b = spec.beta;
  double v = b(0) + b(1) * x1 + b(2) * x2;
  if (spec.family == OutcomeFamily::polynomial) {
    v += b(3) * x1 * x1 + b(4) * x2 * x2 + b(5) * x1 * x2;
  }
  return v;
}

Eigen::Matrix2d cholesky2(const Eigen::Matrix2d& s) {
  if (s(0, 0) < kPsdTolerance) throw ValidationError("Cholesky: covariance is not PSD");
  Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
  l(0, 0) = std::sqrt(std::max(s(0, 0), 0.0));
  l(1, 0) = l(0, 0) > 0.0 ? s(1, 0) / l(0, 0) : 0.0;
  const double rest = s(1, 1) - l(1, 0) * l(1, 0);
  if (rest < kPsdTolerance || (l(0, 0) == 0.0 && s(1, 0) != 0.0)) {
    throw ValidationError("Cholesky: covariance is not PSD");
  }
  l(1, 1) = std::sqrt(std::max(rest, 0.0));
  return l;
}

Dataset generate(const DgpSpec& spec, std::uint64_t seed) {
  validate(spec);
  const Eigen::Index n = 2 * spec.n_per_group;
  const std::array<Eigen::Matrix2d, 2> factors{cholesky2(spec.mixture.groups[0].covariance),
                                               cholesky2(spec.mixture.groups[1].covariance)};
  const bool classify = is_classification(spec.family);

  Dataset data;
  data.x.resize(n, 2);
  data.a.resize(n);
  data.y.resize(n);
  if (classify) data.z = Vec(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const int a = i < spec.n_per_group ? 0 : 1;
    Eigen::Vector2d std_normal;
    std_normal(0) = rng.normal();
    std_normal(1) = rng.normal();
    const Eigen::Vector2d x = spec.mixture.groups[a].mean + factors[a] * std_normal;
    data.x.row(i) = x.transpose();
    data.a(i) = a;
    const double h = systematic_part(spec, x(0), x(1));
    if (!classify) {
      data.y(i) = h + rng.normal();
    } else {
      const double risk =
          spec.family == OutcomeFamily::probit ? std_normal_cdf(h) : logistic_cdf(h);
      data.y(i) = risk;
      (*data.z)(i) = rng.uniform() < risk ? 1.0 : 0.0;
    }
  }
  return data;
}

void write_csv(const Dataset& data, std::ostream& out) {
  out << "x1,x2,a,y,z\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << data.x(i, 0) << ',' << data.x(i, 1) << ',' << data.a(i) << ',' << data.y(i) << ',';
    if (data.z) out << static_cast<int>((*data.z)(i));
    out << '\n';
  }
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "x1,x2,a,y,z") {
    throw ConfigError("dataset CSV must start with header x1,x2,a,y,z");
  }
  std::vector<std::array<double, 4>> rows;
  std::vector<std::optional<double>> zs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<std::string, 5> fields;
    std::stringstream ss(line);
    std::size_t k = 0;
    for (std::string f; k < 5 && std::getline(ss, f, ','); ++k) fields[k] = f;
    if (k < 4) throw ConfigError("dataset CSV line " + std::to_string(line_no) + ": too few fields");
    try {
      rows.push_back({std::stod(fields[0]), std::stod(fields[1]), std::stod(fields[2]),
                      std::stod(fields[3])});
      zs.push_back(fields[4].empty() ? std::nullopt : std::optional(std::stod(fields[4])));
    } catch (const std::exception&) {
      throw ConfigError("dataset CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const bool classify = n > 0 && zs.front().has_value();
  Dataset data;
  data.x.resize(n, 2);
  data.a.resize(n);
  data.y.resize(n);
  if (classify) data.z = Vec(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    data.x(i, 0) = r[0];
    data.x(i, 1) = r[1];
    data.a(i) = static_cast<int>(r[2]);
    data.y(i) = r[3];
    const auto& z = zs[static_cast<std::size_t>(i)];
    if (z.has_value() != classify) throw ConfigError("dataset CSV mixes rows with and without z");
    if (classify) (*data.z)(i) = *z;
  }
  return data;
}

}  // namespace misspec
