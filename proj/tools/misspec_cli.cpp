#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "misspec/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;

misspec::Vec parse_beta(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw misspec::ConfigError("--beta: '" + item + "' is not a number");
    }
  }
  return Eigen::Map<const misspec::Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

misspec::Mixture read_mixture(const std::string& path) {
  if (path.empty()) return misspec::table1_mixture();
  std::ifstream in(path);
  if (!in) throw misspec::ConfigError("cannot open mixture file '" + path + "'");
  try {
    return misspec::mixture_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw misspec::ConfigError("mixture file '" + path + "': " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-level prediction error and bias under model mis-specification"};
  app.require_subcommand(1);

  std::string config_path, format, out_path, family = "linear", beta_text = "-2,1,1", mixture_path;
  std::uint64_t seed = 42;
  int replications = 0, threads = 1;
  bool timing = false;

  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Base seed");
    cmd->add_option("--replications", replications, "Replications per cell")->check(CLI::PositiveNumber);
    cmd->add_option("--format", format, "csv | markdown | json")
        ->check(CLI::IsMember({"csv", "markdown", "json"}));
    cmd->add_option("--out", out_path, "Output path ('-' for stdout)");
    cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--timing", timing, "Include wall time in JSON output");
  };

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  add_output(run_cmd);

  auto* table1_cmd = app.add_subcommand("table1", "Reproduce the ten-row simulation table");
  add_output(table1_cmd);

  auto* analytic_cmd = app.add_subcommand("analytic", "Closed-form group errors and bias");
  analytic_cmd->add_option("--family", family, "linear | probit")
      ->check(CLI::IsMember({"linear", "probit"}));
  analytic_cmd->add_option("--beta", beta_text, "Coefficients b0,b1,b2");
  analytic_cmd->add_option("--mixture", mixture_path, "Mixture JSON (default: table configuration)");

  std::string sim_family = "linear", sim_beta_text;
  Eigen::Index n_per_group = 10000;
  auto* simulate_cmd = app.add_subcommand("simulate", "Write one simulated dataset as CSV");
  simulate_cmd->add_option("--family", sim_family, "linear | polynomial | probit | logit")
      ->check(CLI::IsMember({"linear", "polynomial", "probit", "logit"}));
  simulate_cmd->add_option("--beta", sim_beta_text,
                           "Coefficients, comma separated (default -2,1,1 or -2,1,1,1,1,-1)");
  simulate_cmd->add_option("--mixture", mixture_path, "Mixture JSON (default: table configuration)");
  simulate_cmd->add_option("--n-per-group", n_per_group, "Rows per group")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", seed, "Seed");
  simulate_cmd->add_option("--out", out_path, "Output path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*analytic_cmd) {
      const auto report = misspec::analytic_report(misspec::parse_outcome_family(family),
                                                   parse_beta(beta_text), read_mixture(mixture_path));
      std::cout << report.dump(2) << '\n';
      return 0;
    }

    if (*simulate_cmd) {
      misspec::DgpSpec spec;
      spec.family = misspec::parse_outcome_family(sim_family);
      if (sim_beta_text.empty()) {
        sim_beta_text = spec.family == misspec::OutcomeFamily::polynomial ? "-2,1,1,1,1,-1" : "-2,1,1";
      }
      spec.beta = parse_beta(sim_beta_text);
      spec.mixture = read_mixture(mixture_path);
      spec.n_per_group = n_per_group;
      try {
        misspec::validate(spec);
      } catch (const misspec::ValidationError& e) {
        throw misspec::ConfigError(e.what());
      }
      const auto data = misspec::generate(spec, seed);
      if (out_path.empty() || out_path == "-") {
        misspec::write_csv(data, std::cout);
      } else {
        std::ofstream file(out_path, std::ios::binary);
        if (!file) throw misspec::Error("cannot open '" + out_path + "' for writing");
        misspec::write_csv(data, file);
      }
      return 0;
    }

    misspec::ExperimentConfig config;
    if (*run_cmd) {
      config = misspec::load_config(config_path);
      if (run_cmd->count("--seed")) config.seed = seed;
    } else {
      config = misspec::table1_config(seed, 30);
    }
    if (replications > 0) {
      config.replications = replications;
      for (auto& cell : config.cells) cell.replications.reset();
    }
    if (!format.empty()) config.output.format = misspec::parse_output_format(format);
    if (!out_path.empty()) config.output.path = out_path;
    config.output.include_timing = timing;

    misspec::RunOptions options;
    options.threads = threads;
    const auto rows = misspec::run(config, options);
    misspec::emit(rows, config.output);
    for (const auto& row : rows) {
      if (!row.error.empty()) std::cerr << row.cell << ": " << row.error << '\n';
    }
    return misspec::exit_code(rows);
  } catch (const misspec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const misspec::PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return kExitConfig;
  } catch (const misspec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
