#ifndef MISSPEC_EXPERIMENT_HPP
#define MISSPEC_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "misspec/analytic_linear.hpp"
#include "misspec/audit.hpp"
#include "misspec/dgp.hpp"
#include "misspec/estimators.hpp"

namespace misspec {

enum class OutputFormat { csv, markdown, json };
OutputFormat parse_output_format(std::string_view name);

struct CellConfig {
  std::string name;
  DgpSpec dgp;
  ModelFamily model = ModelFamily::ols;
  FeatureSet features = FeatureSet::both;
  std::optional<int> replications;  // overrides ExperimentConfig::replications
};

struct OutputOptions {
  OutputFormat format = OutputFormat::csv;
  std::string path = "-";  // "-" is standard output
  bool include_timing = false;
};

struct ExperimentConfig {
  std::vector<CellConfig> cells;
  int replications = 1;
  std::uint64_t seed = 42;
  double z_threshold = 4.0;
  // Added in quadrature to SEs when checking the probit omitted-variable
  // closed form, which is approximate under a mixture of X2.
  double probit_mixture_tolerance = 0.02;
  ForestParams forest;
  OutputOptions output;

  int replications_for(const CellConfig& cell) const {
    return cell.replications.value_or(replications);
  }
};

void validate(const ExperimentConfig& config);

/// Seed of replication r of cell c.
std::uint64_t replication_seed(std::uint64_t base, std::size_t cell, std::size_t replication);

/// The ten Table 1 cells with their reference parameters.
ExperimentConfig table1_config(std::uint64_t seed = 42, int replications = 30);

/// Closed-form group errors for a cell when one applies: zeros under correct
/// specification, the linear omitted-variable form for linear/linear/x1_only,
/// and the probit form when its assumptions hold. Also reports the model
/// tolerance to use when comparing.
struct AnalyticCounterpart {
  GroupErrors prediction;
  std::string source;
  double model_tolerance = 0.0;
};
std::optional<AnalyticCounterpart> analytic_counterpart(const CellConfig& cell,
                                                        const ExperimentConfig& config);

struct ResultRow {
  std::string cell;
  std::string dgp, model, features;
  Eigen::Index n_per_group = 0;
  int replications = 0;
  int failed_replications = 0;
  // Means over successful replications. SEs are across replications
  // (sd / sqrt(R)) when R > 1, otherwise the row-level SEs of the single run.
  ErrorReport summary;
  std::optional<AnalyticCounterpart> analytic;
  std::optional<Comparison> comparison;
  std::string verdict = "n/a";  // consistent | inconsistent | n/a | error
  std::string error;
  Vec mean_coefficients;  // empty for forests
  int max_iterations = 0;
  double max_gradient_norm = 0.0;
  std::vector<ErrorReport> replicates;
  double wall_time_s = 0.0;
};

struct RunOptions {
  int threads = 1;
  // Permutation of task indices giving the order tasks are started in; the
  // task for (cell c, replication r) has index offset(c) + r. Empty means
  // natural order. Output does not depend on it.
  std::vector<std::size_t> execution_order;
};

/// One dataset, fit, prediction and audit per (cell, replication), then
/// aggregation in (cell, replication) order. Errors inside a cell are
/// recorded in its row.
std::vector<ResultRow> run(const ExperimentConfig& config, const RunOptions& options = {});

/// Total number of (cell, replication) tasks.
std::size_t task_count(const ExperimentConfig& config);

void emit(const std::vector<ResultRow>& rows, OutputFormat format, std::ostream& out,
          bool include_timing = false);
/// Writes to `path`, or standard output when path is "-".
void emit(const std::vector<ResultRow>& rows, const OutputOptions& output);

inline constexpr std::string_view kCsvHeader =
    "dgp,model,features,b_pop,b_g0,b_g1,tau,se_pop,se_g0,se_g1,se_tau,analytic_b_g0,"
    "analytic_b_g1,analytic_tau,verdict";

/// 0 when every row is consistent or has no analytic counterpart, 1 otherwise.
int exit_code(const std::vector<ResultRow>& rows);

// JSON forms. Rows round-trip exactly through to_json / rows_from_json.
nlohmann::json to_json(const ResultRow& row, bool include_timing = true);
std::vector<ResultRow> rows_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FittedModel& model);
nlohmann::json to_json(const Mixture& mixture);
Mixture mixture_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// The `analytic` subcommand payload: closed-form prediction for the
/// linear or probit family, plus the vanishing-bias condition for linear.
nlohmann::json analytic_report(OutcomeFamily family, const Vec& beta, const Mixture& mixture);

}  // namespace misspec

#endif  // MISSPEC_EXPERIMENT_HPP
