#include "misspec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <thread>

#include "misspec/analytic_probit.hpp"
#include "misspec/rng.hpp"

namespace misspec {

namespace {

constexpr std::uint64_t kForestStream = 0xF04E57;

bool model_supports(OutcomeFamily dgp, ModelFamily model) {
  switch (model) {
    case ModelFamily::ols:
    case ModelFamily::forest: return !is_classification(dgp);
    case ModelFamily::probit:
    case ModelFamily::logit: return is_classification(dgp);
  }
  return false;
}

bool correctly_specified(const CellConfig& cell) {
  if (cell.features != FeatureSet::both) return false;
  const auto dgp = cell.dgp.family;
  return (dgp == OutcomeFamily::linear && cell.model == ModelFamily::ols) ||
         (dgp == OutcomeFamily::probit && cell.model == ModelFamily::probit) ||
         (dgp == OutcomeFamily::logit && cell.model == ModelFamily::logit);
}

struct TaskResult {
  std::optional<ErrorReport> report;
  Vec coefficients;
  FitDiagnostics diagnostics;
  std::string error;
  double seconds = 0.0;
};

TaskResult run_task(const CellConfig& cell, const ExperimentConfig& config, std::uint64_t seed) {
  TaskResult out;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Dataset data = generate(cell.dgp, seed);
    FittedModel model;
    switch (cell.model) {
      case ModelFamily::ols: model = fit_ols(data, cell.features); break;
      case ModelFamily::probit: model = fit_probit(data, cell.features); break;
      case ModelFamily::logit: model = fit_logit(data, cell.features); break;
      case ModelFamily::forest:
        model = fit_forest(data, cell.features, config.forest, derive_seed(seed, kForestStream));
        break;
    }
    out.report = error_report(predict(model, data.x), data.y, data.a);
    out.coefficients = model.coefficients;
    out.diagnostics = model.diagnostics;
  } catch (const Error& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double replication_se(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

ResultRow aggregate(const CellConfig& cell, const ExperimentConfig& config,
                    std::span<const TaskResult> tasks) {
  ResultRow row;
  row.cell = cell.name;
  row.dgp = to_string(cell.dgp.family);
  row.model = to_string(cell.model);
  row.features = to_string(cell.features);
  row.n_per_group = cell.dgp.n_per_group;
  row.replications = static_cast<int>(tasks.size());

  std::array<std::vector<double>, 4> stats;
  std::vector<Vec> coefficients;
  for (const auto& t : tasks) {
    row.wall_time_s += t.seconds;
    if (!t.report) {
      ++row.failed_replications;
      if (row.error.empty()) row.error = t.error;
      continue;
    }
    const auto& r = *t.report;
    row.replicates.push_back(r);
    stats[0].push_back(r.b_pop);
    stats[1].push_back(r.b_group0);
    stats[2].push_back(r.b_group1);
    stats[3].push_back(r.tau);
    if (t.coefficients.size() > 0) coefficients.push_back(t.coefficients);
    row.max_iterations = std::max(row.max_iterations, t.diagnostics.iterations);
    row.max_gradient_norm = std::max(row.max_gradient_norm, t.diagnostics.gradient_norm);
  }

  const auto nan = std::numeric_limits<double>::quiet_NaN();
  auto& s = row.summary;
  if (row.replicates.empty()) {
    s.b_pop = s.b_group0 = s.b_group1 = s.tau = nan;
    s.se_pop = s.se_group0 = s.se_group1 = s.se_tau = nan;
  } else if (row.replicates.size() == 1) {
    s = row.replicates.front();
  } else {
    s.b_pop = mean_of(stats[0]);
    s.b_group0 = mean_of(stats[1]);
    s.b_group1 = mean_of(stats[2]);
    s.tau = s.b_group1 - s.b_group0;
    s.se_pop = replication_se(stats[0]);
    s.se_group0 = replication_se(stats[1]);
    s.se_group1 = replication_se(stats[2]);
    s.se_tau = replication_se(stats[3]);
    const auto& first = row.replicates.front();
    s.n_pop = first.n_pop;
    s.n_group0 = first.n_group0;
    s.n_group1 = first.n_group1;
  }
  if (!coefficients.empty()) {
    row.mean_coefficients = Vec::Zero(coefficients.front().size());
    for (const auto& c : coefficients) row.mean_coefficients += c;
    row.mean_coefficients /= static_cast<double>(coefficients.size());
  }

  try {
    row.analytic = analytic_counterpart(cell, config);
  } catch (const Error& e) {
    if (row.error.empty()) row.error = std::string("analytic: ") + e.what();
  }
  if (!row.error.empty()) {
    row.verdict = "error";
  } else if (row.analytic) {
    CompareOptions opts;
    opts.z_threshold = config.z_threshold;
    opts.model_tolerance = row.analytic->model_tolerance;
    row.comparison = compare(row.analytic->prediction, row.summary, opts);
    row.verdict = std::string(to_string(row.comparison->all_consistent() ? Verdict::consistent
                                                                          : Verdict::inconsistent));
  }
  return row;
}

}  // namespace

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "markdown" || name == "md") return OutputFormat::markdown;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& config) {
  if (config.cells.empty()) throw ConfigError("config has no cells");
  if (config.replications < 1) throw ConfigError("replications must be at least 1");
  if (!(config.z_threshold > 0.0)) throw ConfigError("z_threshold must be positive");
  for (const auto& cell : config.cells) {
    const std::string where = "cell '" + cell.name + "': ";
    if (config.replications_for(cell) < 1) throw ConfigError(where + "replications must be at least 1");
    if (!model_supports(cell.dgp.family, cell.model)) {
      throw ConfigError(where + std::string(to_string(cell.model)) + " model cannot be fitted to a " +
                        std::string(to_string(cell.dgp.family)) + " outcome");
    }
    try {
      validate(cell.dgp);
    } catch (const ValidationError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t cell, std::size_t replication) {
  return derive_seed(base, splitmix64_mix(static_cast<std::uint64_t>(cell) + kGoldenGamma) ^
                               static_cast<std::uint64_t>(replication));
}

ExperimentConfig table1_config(std::uint64_t seed, int replications) {
  ExperimentConfig config;
  config.seed = seed;
  config.replications = replications;
  const Mixture mixture = table1_mixture();
  Vec beta(3);
  beta << -2.0, 1.0, 1.0;
  Vec poly(6);
  poly << -2.0, 1.0, 1.0, 1.0, 1.0, -1.0;

  auto cell = [&](OutcomeFamily dgp, ModelFamily model, FeatureSet features) {
    CellConfig c;
    c.dgp.family = dgp;
    c.dgp.beta = dgp == OutcomeFamily::polynomial ? poly : beta;
    c.dgp.mixture = mixture;
    c.dgp.n_per_group = 10000;
    c.model = model;
    c.features = features;
    c.name = std::string(to_string(dgp)) + "/" + std::string(to_string(model)) + "/" +
             std::string(to_string(features));
    return c;
  };
  for (auto f : {FeatureSet::both, FeatureSet::x1_only}) {
    config.cells.push_back(cell(OutcomeFamily::linear, ModelFamily::ols, f));
  }
  for (auto f : {FeatureSet::both, FeatureSet::x1_only}) {
    config.cells.push_back(cell(OutcomeFamily::logit, ModelFamily::logit, f));
  }
  for (auto f : {FeatureSet::both, FeatureSet::x1_only}) {
    config.cells.push_back(cell(OutcomeFamily::probit, ModelFamily::probit, f));
  }
  for (auto f : {FeatureSet::both, FeatureSet::x1_only}) {
    config.cells.push_back(cell(OutcomeFamily::linear, ModelFamily::forest, f));
  }
  for (auto f : {FeatureSet::both, FeatureSet::x1_only}) {
    config.cells.push_back(cell(OutcomeFamily::polynomial, ModelFamily::ols, f));
  }
  return config;
}

std::optional<AnalyticCounterpart> analytic_counterpart(const CellConfig& cell,
                                                        const ExperimentConfig& config) {
  const Vec& b = cell.dgp.beta;
  if (correctly_specified(cell)) return AnalyticCounterpart{{}, "correct specification", 0.0};
  if (cell.features != FeatureSet::x1_only) return std::nullopt;
  if (cell.dgp.family == OutcomeFamily::linear && cell.model == ModelFamily::ols) {
    return AnalyticCounterpart{omitted_group_errors(LinearBeta{b(0), b(1), b(2)}, cell.dgp.mixture),
                               "linear omitted variable", 0.0};
  }
  if (cell.dgp.family == OutcomeFamily::probit && cell.model == ModelFamily::probit) {
    try {
      check_probit_assumptions(cell.dgp.mixture);
    } catch (const PreconditionError&) {
      return std::nullopt;
    }
    return AnalyticCounterpart{
        omitted_group_errors_probit(ProbitBeta{b(0), b(1), b(2)}, cell.dgp.mixture),
        "probit omitted variable", config.probit_mixture_tolerance};
  }
  return std::nullopt;
}

std::size_t task_count(const ExperimentConfig& config) {
  std::size_t n = 0;
  for (const auto& cell : config.cells) n += static_cast<std::size_t>(config.replications_for(cell));
  return n;
}

std::vector<ResultRow> run(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  std::vector<std::size_t> offsets;
  std::vector<std::pair<std::size_t, std::size_t>> tasks;  // (cell, replication)
  for (std::size_t c = 0; c < config.cells.size(); ++c) {
    offsets.push_back(tasks.size());
    const auto reps = static_cast<std::size_t>(config.replications_for(config.cells[c]));
    for (std::size_t r = 0; r < reps; ++r) tasks.emplace_back(c, r);
  }

  std::vector<std::size_t> order = options.execution_order;
  if (order.empty()) {
    order.resize(tasks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  } else {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (sorted[k] != k || sorted.size() != tasks.size()) {
        throw ConfigError("execution_order is not a permutation of the task indices");
      }
    }
  }

  std::vector<TaskResult> results(tasks.size());
  auto execute = [&](std::size_t t) {
    const auto [c, r] = tasks[t];
    results[t] = run_task(config.cells[c], config, replication_seed(config.seed, c, r));
  };
  const int workers = std::clamp<int>(options.threads, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  if (workers == 1) {
    for (std::size_t t : order) execute(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < order.size(); k = next++) execute(order[k]);
      });
    }
  }

  std::vector<ResultRow> rows;
  for (std::size_t c = 0; c < config.cells.size(); ++c) {
    const auto reps = static_cast<std::size_t>(config.replications_for(config.cells[c]));
    rows.push_back(aggregate(config.cells[c], config,
                             std::span<const TaskResult>(results).subspan(offsets[c], reps)));
  }
  return rows;
}

int exit_code(const std::vector<ResultRow>& rows) {
  for (const auto& row : rows) {
    if (row.verdict == "inconsistent" || row.verdict == "error") return 1;
  }
  return 0;
}

nlohmann::json analytic_report(OutcomeFamily family, const Vec& beta, const Mixture& mixture) {
  if (beta.size() != 3) throw ConfigError("--beta needs exactly three coefficients b0,b1,b2");
  nlohmann::json j;
  j["family"] = std::string(to_string(family));
  j["beta"] = std::vector<double>(beta.data(), beta.data() + beta.size());
  GroupErrors p;
  if (family == OutcomeFamily::linear) {
    const LinearBeta b{beta(0), beta(1), beta(2)};
    const auto gamma = omitted_coefficients(b, pooled_moments(mixture));
    p = omitted_group_errors(b, mixture);
    j["gamma_short"] = {gamma.gamma0, gamma.gamma1};
    j["bias_vanishes"] = bias_vanishes_condition(b, mixture);
    j["worst_case_relation"] = worst_case_check(p, mixture);
  } else if (family == OutcomeFamily::probit) {
    const ProbitBeta b{beta(0), beta(1), beta(2)};
    p = omitted_group_errors_probit(b, mixture);
    const auto pooled = pooled_moments(mixture);
    const auto gamma = omitted_coefficients_probit(b, pooled.e_x2,
                                                   std::sqrt(mixture.groups[0].covariance(1, 1)));
    j["gamma_short"] = {gamma.gamma0, gamma.gamma1};
  } else {
    throw ConfigError("analytic forms exist only for the linear and probit families");
  }
  j["b_pop"] = p.b_pop;
  j["b_g0"] = p.b_group0;
  j["b_g1"] = p.b_group1;
  j["tau"] = p.tau;
  return j;
}

}  // namespace misspec
