#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include "misspec/experiment.hpp"

namespace misspec {

using nlohmann::json;

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// JSON has no NaN; it is written as null and read back as NaN.
double number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec json_vec(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = number(j[k]);
  return v;
}

json report_json(const ErrorReport& r) {
  return {{"b_pop", r.b_pop},        {"b_g0", r.b_group0},      {"b_g1", r.b_group1},
          {"tau", r.tau},            {"se_pop", r.se_pop},      {"se_g0", r.se_group0},
          {"se_g1", r.se_group1},    {"se_tau", r.se_tau},      {"n_pop", r.n_pop},
          {"n_g0", r.n_group0},      {"n_g1", r.n_group1}};
}

ErrorReport json_report(const json& j) {
  ErrorReport r;
  r.b_pop = number(j.at("b_pop"));
  r.b_group0 = number(j.at("b_g0"));
  r.b_group1 = number(j.at("b_g1"));
  r.tau = number(j.at("tau"));
  r.se_pop = number(j.at("se_pop"));
  r.se_group0 = number(j.at("se_g0"));
  r.se_group1 = number(j.at("se_g1"));
  r.se_tau = number(j.at("se_tau"));
  r.n_pop = j.at("n_pop").get<Eigen::Index>();
  r.n_group0 = j.at("n_g0").get<Eigen::Index>();
  r.n_group1 = j.at("n_g1").get<Eigen::Index>();
  return r;
}

json prediction_json(const GroupErrors& p) {
  return {{"b_pop", p.b_pop}, {"b_g0", p.b_group0}, {"b_g1", p.b_group1}, {"tau", p.tau}};
}

GroupErrors json_prediction(const json& j) {
  return {number(j.at("b_pop")), number(j.at("b_g0")), number(j.at("b_g1")), number(j.at("tau"))};
}

std::string dgp_display(const std::string& id) {
  if (id == "linear") return "Linear";
  if (id == "polynomial") return "Polynomial";
  if (id == "probit") return "Probit";
  if (id == "logit") return "Logistic";
  return id;
}

std::string model_display(const std::string& id) {
  if (id == "linear") return "Linear";
  if (id == "probit") return "Probit";
  if (id == "logit") return "Logistic";
  if (id == "forest") return "Random Forest";
  return id;
}

std::string features_display(const std::string& id) { return id == "both" ? "X1, X2" : "X1"; }

void emit_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& row : rows) {
    const auto& s = row.summary;
    out << row.dgp << ',' << row.model << ',' << row.features;
    for (double v : {s.b_pop, s.b_group0, s.b_group1, s.tau, s.se_pop, s.se_group0, s.se_group1,
                     s.se_tau}) {
      out << ',' << fmt6(v);
    }
    if (row.analytic) {
      const auto& p = row.analytic->prediction;
      out << ',' << fmt6(p.b_group0) << ',' << fmt6(p.b_group1) << ',' << fmt6(p.tau);
    } else {
      out << ",,,";
    }
    out << ',' << row.verdict << '\n';
  }
}

void emit_markdown(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "| DGP | Model | Features | b(φ) | b(φ, A=0) | b(φ, A=1) | τ(φ) |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    const auto& s = row.summary;
    out << "| " << dgp_display(row.dgp) << " | " << model_display(row.model) << " | "
        << features_display(row.features) << " | " << fmt6(s.b_pop) << " | " << fmt6(s.b_group0)
        << " | " << fmt6(s.b_group1) << " | " << fmt6(s.tau) << " |\n";
  }
}

}  // namespace

json to_json(const ResultRow& row, bool include_timing) {
  json j;
  j["cell"] = row.cell;
  j["dgp"] = row.dgp;
  j["model"] = row.model;
  j["features"] = row.features;
  j["n_per_group"] = row.n_per_group;
  j["replications"] = row.replications;
  j["failed_replications"] = row.failed_replications;
  j["summary"] = report_json(row.summary);
  if (row.analytic) {
    j["analytic"] = prediction_json(row.analytic->prediction);
    j["analytic"]["source"] = row.analytic->source;
    j["analytic"]["model_tolerance"] = row.analytic->model_tolerance;
  } else {
    j["analytic"] = nullptr;
  }
  if (row.comparison) {
    json stats = json::object();
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& s = row.comparison->statistics[k];
      stats[std::string(kStatisticNames[k])] = {{"analytic", s.analytic}, {"empirical", s.empirical},
                                               {"se", s.se},             {"z", s.z},
                                               {"verdict", to_string(s.verdict)}};
    }
    j["comparison"] = {{"z_threshold", row.comparison->z_threshold}, {"statistics", stats}};
  } else {
    j["comparison"] = nullptr;
  }
  j["verdict"] = row.verdict;
  j["error"] = row.error;
  j["mean_coefficients"] = vec_json(row.mean_coefficients);
  j["max_iterations"] = row.max_iterations;
  j["max_gradient_norm"] = row.max_gradient_norm;
  j["replicates"] = json::array();
  for (const auto& r : row.replicates) j["replicates"].push_back(report_json(r));
  if (include_timing) j["wall_time_s"] = row.wall_time_s;
  return j;
}

std::vector<ResultRow> rows_from_json(const json& j) {
  std::vector<ResultRow> rows;
  for (const auto& jr : j.at("rows")) {
    ResultRow row;
    row.cell = jr.at("cell").get<std::string>();
    row.dgp = jr.at("dgp").get<std::string>();
    row.model = jr.at("model").get<std::string>();
    row.features = jr.at("features").get<std::string>();
    row.n_per_group = jr.at("n_per_group").get<Eigen::Index>();
    row.replications = jr.at("replications").get<int>();
    row.failed_replications = jr.at("failed_replications").get<int>();
    row.summary = json_report(jr.at("summary"));
    if (!jr.at("analytic").is_null()) {
      const auto& ja = jr.at("analytic");
      row.analytic = AnalyticCounterpart{json_prediction(ja), ja.at("source").get<std::string>(),
                                         number(ja.at("model_tolerance"))};
    }
    if (!jr.at("comparison").is_null()) {
      const auto& jc = jr.at("comparison");
      Comparison c;
      c.analytic = row.analytic ? row.analytic->prediction : GroupErrors{};
      c.empirical = row.summary;
      c.z_threshold = number(jc.at("z_threshold"));
      for (std::size_t k = 0; k < 4; ++k) {
        const auto& js = jc.at("statistics").at(std::string(kStatisticNames[k]));
        auto& s = c.statistics[k];
        s.analytic = number(js.at("analytic"));
        s.empirical = number(js.at("empirical"));
        s.se = number(js.at("se"));
        s.z = number(js.at("z"));
        s.verdict = js.at("verdict").get<std::string>() == "consistent" ? Verdict::consistent
                                                                        : Verdict::inconsistent;
      }
      row.comparison = c;
    }
    row.verdict = jr.at("verdict").get<std::string>();
    row.error = jr.at("error").get<std::string>();
    row.mean_coefficients = json_vec(jr.at("mean_coefficients"));
    row.max_iterations = jr.at("max_iterations").get<int>();
    row.max_gradient_norm = number(jr.at("max_gradient_norm"));
    for (const auto& r : jr.at("replicates")) row.replicates.push_back(json_report(r));
    if (jr.contains("wall_time_s")) row.wall_time_s = number(jr.at("wall_time_s"));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const FittedModel& model) {
  json j;
  j["family"] = std::string(to_string(model.family));
  j["features"] = std::string(to_string(model.features));
  j["coefficients"] = vec_json(model.coefficients);
  j["diagnostics"] = {{"iterations", model.diagnostics.iterations},
                      {"gradient_norm", model.diagnostics.gradient_norm}};
  if (model.forest) j["trees"] = model.forest->trees.size();
  return j;
}

void emit(const std::vector<ResultRow>& rows, OutputFormat format, std::ostream& out,
          bool include_timing) {
  if (rows.empty()) throw ValidationError("nothing to emit");
  switch (format) {
    case OutputFormat::csv: emit_csv(rows, out); break;
    case OutputFormat::markdown: emit_markdown(rows, out); break;
    case OutputFormat::json: {
      json doc = {{"rows", json::array()}};
      for (const auto& row : rows) doc["rows"].push_back(to_json(row, include_timing));
      out << doc.dump(2) << '\n';
      break;
    }
  }
}

void emit(const std::vector<ResultRow>& rows, const OutputOptions& output) {
  if (output.path.empty() || output.path == "-") {
    emit(rows, output.format, std::cout, output.include_timing);
    return;
  }
  std::ofstream file(output.path, std::ios::binary);
  if (!file) throw Error("cannot open '" + output.path + "' for writing");
  emit(rows, output.format, file, output.include_timing);
  file.flush();
  if (!file) throw Error("write to '" + output.path + "' failed");
}

}  // namespace misspec
