#include <fstream>
#include <sstream>

#include "misspec/experiment.hpp"

namespace misspec {

using nlohmann::json;

namespace {

std::string_view format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::markdown: return "markdown";
    case OutputFormat::json: return "json";
  }
  return "csv";
}

GroupGaussian group_from_json(const json& j) {
  GroupGaussian g;
  const auto& mean = j.at("mean");
  const auto& cov = j.at("covariance");
  if (mean.size() != 2 || cov.size() != 2 || cov[0].size() != 2 || cov[1].size() != 2) {
    throw ConfigError("group needs a 2-vector mean and a 2x2 covariance");
  }
  g.mean << mean[0].get<double>(), mean[1].get<double>();
  g.covariance << cov[0][0].get<double>(), cov[0][1].get<double>(), cov[1][0].get<double>(),
      cov[1][1].get<double>();
  return g;
}

json group_json(const GroupGaussian& g) {
  return {{"mean", {g.mean(0), g.mean(1)}},
          {"covariance",
           {{g.covariance(0, 0), g.covariance(0, 1)}, {g.covariance(1, 0), g.covariance(1, 1)}}}};
}

}  // namespace

json to_json(const Mixture& mixture) {
  return {{"weight_protected", mixture.weight_protected},
          {"groups", {group_json(mixture.groups[0]), group_json(mixture.groups[1])}}};
}

Mixture mixture_from_json(const json& j) {
  try {
    Mixture m;
    m.weight_protected = j.value("weight_protected", 0.5);
    const auto& groups = j.at("groups");
    if (groups.size() != 2) throw ConfigError("mixture needs exactly two groups");
    m.groups[0] = group_from_json(groups[0]);
    m.groups[1] = group_from_json(groups[1]);
    validate(m);
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mixture: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("mixture: ") + e.what());
  }
}

json to_json(const ExperimentConfig& config) {
  json cells = json::array();
  for (const auto& c : config.cells) {
    json jc = {{"name", c.name},
               {"model", std::string(to_string(c.model))},
               {"features", std::string(to_string(c.features))},
               {"dgp",
                {{"family", std::string(to_string(c.dgp.family))},
                 {"beta", std::vector<double>(c.dgp.beta.data(), c.dgp.beta.data() + c.dgp.beta.size())},
                 {"n_per_group", c.dgp.n_per_group},
                 {"mixture", to_json(c.dgp.mixture)}}}};
    if (c.replications) jc["replications"] = *c.replications;
    cells.push_back(jc);
  }
  return {{"seed", config.seed},
          {"replications", config.replications},
          {"z_threshold", config.z_threshold},
          {"probit_mixture_tolerance", config.probit_mixture_tolerance},
          {"forest",
           {{"trees", config.forest.trees},
            {"max_depth", config.forest.max_depth},
            {"min_leaf", config.forest.min_leaf},
            {"bootstrap_ratio", config.forest.bootstrap_ratio}}},
          {"output", {{"format", std::string(format_name(config.output.format))}, {"path", config.output.path}}},
          {"cells", cells}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  try {
    config.seed = j.value("seed", config.seed);
    config.replications = j.value("replications", config.replications);
    config.z_threshold = j.value("z_threshold", config.z_threshold);
    config.probit_mixture_tolerance = j.value("probit_mixture_tolerance", config.probit_mixture_tolerance);
    if (j.contains("forest")) {
      const auto& f = j.at("forest");
      config.forest.trees = f.value("trees", config.forest.trees);
      config.forest.max_depth = f.value("max_depth", config.forest.max_depth);
      config.forest.min_leaf = f.value("min_leaf", config.forest.min_leaf);
      config.forest.bootstrap_ratio = f.value("bootstrap_ratio", config.forest.bootstrap_ratio);
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      config.output.format = parse_output_format(o.value("format", std::string("csv")));
      config.output.path = o.value("path", std::string("-"));
    }
    std::size_t index = 0;
    for (const auto& jc : j.at("cells")) {
      CellConfig cell;
      const auto& d = jc.at("dgp");
      cell.dgp.family = parse_outcome_family(d.at("family").get<std::string>());
      const auto beta = d.at("beta").get<std::vector<double>>();
      cell.dgp.beta = Eigen::Map<const Vec>(beta.data(), static_cast<Eigen::Index>(beta.size()));
      cell.dgp.n_per_group = d.value("n_per_group", Eigen::Index{10000});
      cell.dgp.mixture = d.contains("mixture") ? mixture_from_json(d.at("mixture")) : table1_mixture();
      cell.model = parse_model_family(jc.at("model").get<std::string>());
      cell.features = parse_feature_set(jc.value("features", std::string("both")));
      if (jc.contains("replications")) cell.replications = jc.at("replications").get<int>();
      cell.name = jc.value("name", "cell" + std::to_string(index));
      config.cells.push_back(std::move(cell));
      ++index;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

}  // namespace misspec
