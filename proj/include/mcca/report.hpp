#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcca/config.hpp"
#include "mcca/dataset.hpp"
#include "mcca/error.hpp"
#include "mcca/functional_mcca.hpp"
#include "mcca/hopkins.hpp"
#include "mcca/kernel_mcca.hpp"
#include "mcca/synthetic.hpp"

namespace mcca {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  out << content;
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline nlohmann::json config_to_json(const AnalysisConfig& cfg) {
  nlohmann::json j;
  j["method"] = cfg.method == Method::Kernel ? "kernel" : "functional";
  if (cfg.gamma_is_median)
    j["kernel_gamma"] = "median";
  else
    j["kernel_gamma"] = cfg.kernel_gamma;
  if (cfg.epsilon_is_auto)
    j["epsilon"] = "auto";
  else
    j["epsilon"] = cfg.epsilon;
  j["n_components"] = cfg.n_components;
  j["basis_size"] = cfg.basis_size;
  if (cfg.hopkins_m_is_auto)
    j["hopkins_m"] = "auto";
  else
    j["hopkins_m"] = cfg.hopkins_m;
  j["hopkins_reps"] = cfg.hopkins_reps;
  j["rng_seed"] = cfg.rng_seed;
  j["standardize"] = cfg.standardize;
  return j;
}

inline nlohmann::json hopkins_to_json(const HopkinsResult& h) {
  nlohmann::json j;
  j["H"] = h.H;
  j["m"] = h.m;
  j["d"] = h.d;
  j["reps"] = h.reps;
  j["p_value"] = h.p_value;
  j["H_values"] = h.H_values;
  j["region"] = h.region;
  j["seed"] = h.seed;
  return j;
}

// Machine-readable analysis report: correlations, weights, scores, the
// effective configuration, and solver diagnostics.
inline nlohmann::json report_to_json(const MccaSolution& sol,
                                     const std::vector<std::string>& unit_labels,
                                     const std::vector<std::string>& feature_names,
                                     const AnalysisConfig& cfg,
                                     const std::optional<HopkinsResult>& hopkins_result) {
  nlohmann::json j;
  j["method"] = sol.method == Method::Kernel ? "kernel" : "functional";
  j["epsilon_used"] = sol.epsilon_used;
  j["correlations"] = sol.correlations;
  j["unit_labels"] = unit_labels;
  j["feature_names"] = feature_names;

  nlohmann::json comps = nlohmann::json::array();
  for (std::size_t c = 0; c < sol.correlations.size(); ++c) {
    nlohmann::json comp;
    comp["index"] = c + 1;
    comp["correlation"] = sol.correlations[c];
    comp["degenerate"] =
        c < sol.diagnostics.degenerate.size() ? bool(sol.diagnostics.degenerate[c]) : false;
    nlohmann::json weights = nlohmann::json::array();
    for (const Vector& w : sol.weights[c]) weights.push_back(w);
    comp["weights"] = std::move(weights);
    nlohmann::json scores = nlohmann::json::array();
    for (std::size_t i = 0; i < sol.scores[c].rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t l = 0; l < sol.scores[c].cols(); ++l) row.push_back(sol.scores[c](i, l));
      scores.push_back(std::move(row));
    }
    comp["scores"] = std::move(scores);
    comps.push_back(std::move(comp));
  }
  j["components"] = std::move(comps);

  nlohmann::json diag;
  diag["deflated_rank"] = sol.diagnostics.deflated_rank;
  diag["block_ranks"] = sol.diagnostics.block_ranks;
  diag["warnings"] = sol.diagnostics.warnings;
  j["diagnostics"] = std::move(diag);
  j["config"] = config_to_json(cfg);
  if (hopkins_result) j["hopkins"] = hopkins_to_json(*hopkins_result);
  return j;
}

inline void write_report(const MccaSolution& sol, const std::vector<std::string>& unit_labels,
                         const std::vector<std::string>& feature_names,
                         const AnalysisConfig& cfg,
                         const std::optional<HopkinsResult>& hopkins_result,
                         const std::string& path) {
  write_text_file(path,
                  report_to_json(sol, unit_labels, feature_names, cfg, hopkins_result).dump(2) + "\n");
}

// Round-trips the parts of a solution the report records.
inline MccaSolution read_report(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::Io, "cannot parse report " + path + ": " + e.what());
  }
  MccaSolution sol;
  sol.method = j.at("method").get<std::string>() == "kernel" ? Method::Kernel : Method::Functional;
  sol.epsilon_used = j.at("epsilon_used").get<double>();
  sol.correlations = j.at("correlations").get<Vector>();
  for (const auto& comp : j.at("components")) {
    std::vector<Vector> weights;
    for (const auto& w : comp.at("weights")) weights.push_back(w.get<Vector>());
    sol.weights.push_back(std::move(weights));
    const auto& rows = comp.at("scores");
    Matrix scores(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t l = 0; l < rows[i].size(); ++l) scores(i, l) = rows[i][l].get<double>();
    sol.scores.push_back(std::move(scores));
    if (comp.at("degenerate").get<bool>()) {
      sol.diagnostics.degenerate.resize(sol.weights.size(), false);
      sol.diagnostics.degenerate.back() = true;
    }
  }
  sol.diagnostics.degenerate.resize(sol.weights.size(), false);
  sol.diagnostics.deflated_rank = j.at("diagnostics").at("deflated_rank").get<std::size_t>();
  sol.diagnostics.block_ranks =
      j.at("diagnostics").at("block_ranks").get<std::vector<std::size_t>>();
  sol.diagnostics.warnings =
      j.at("diagnostics").at("warnings").get<std::vector<std::string>>();
  return sol;
}

// Scores in long form: one row per (component, unit, feature).
inline std::string scores_to_csv(const MccaSolution& sol,
                                 const std::vector<std::string>& unit_labels,
                                 const std::vector<std::string>& feature_names) {
  std::ostringstream out;
  out << "unit,component,feature,score\n";
  char buf[64];
  for (std::size_t c = 0; c < sol.scores.size(); ++c)
    for (std::size_t i = 0; i < sol.scores[c].rows(); ++i)
      for (std::size_t l = 0; l < sol.scores[c].cols(); ++l) {
        std::snprintf(buf, sizeof buf, "%.17g", sol.scores[c](i, l));
        out << csv::quote_field(unit_labels[i]) << ',' << (c + 1) << ','
            << csv::quote_field(feature_names[l]) << ',' << buf << '\n';
      }
  return out.str();
}

// Weight functions sampled on a 201-point grid, one row per
// (feature, variable, grid point). Functional method only.
inline std::string weight_curves_to_csv(const MccaSolution& sol, const BasisSpec& basis,
                                        const std::vector<std::size_t>& p,
                                        const std::vector<std::string>& feature_names,
                                        std::size_t component = 0) {
  if (component >= sol.weights.size())
    fail(ErrorCode::InvalidComponentIndex,
         "component " + std::to_string(component + 1) + " of " +
             std::to_string(sol.weights.size()));
  std::ostringstream out;
  out << "feature,variable,t,value\n";
  char tbuf[32], vbuf[64];
  for (std::size_t l = 0; l < sol.weights[component].size(); ++l)
    for (std::size_t v = 0; v < p[l]; ++v)
      for (std::size_t g = 0; g <= 200; ++g) {
        const double t = static_cast<double>(g) / 200.0;
        const double value = weight_function(sol.weights[component][l], basis, v, t);
        std::snprintf(tbuf, sizeof tbuf, "%.3f", t);
        std::snprintf(vbuf, sizeof vbuf, "%.17g", value);
        out << csv::quote_field(feature_names[l]) << ',' << (v + 1) << ',' << tbuf << ','
            << vbuf << '\n';
      }
  return out.str();
}

inline nlohmann::json convergence_to_json(const ConvergenceReport& r) {
  nlohmann::json j;
  j["note"] = ConvergenceReport::kScopeNote;
  j["method"] = r.method == Method::Kernel ? "kernel" : "functional";
  if (r.method == Method::Functional) j["basis_size"] = r.basis_size;
  j["sample_sizes"] = r.sample_sizes;
  j["medians"] = r.medians;
  j["iqrs"] = r.iqrs;
  j["epsilons"] = r.epsilons;
  j["rho_ref"] = r.rho_ref;
  j["reference_n"] = r.reference_n;
  j["reference_epsilon"] = r.reference_epsilon;
  j["reps"] = r.reps;
  return j;
}

inline std::string convergence_errors_to_csv(const ConvergenceReport& r) {
  std::ostringstream out;
  out << "n,rep,abs_error\n";
  char buf[64];
  for (std::size_t i = 0; i < r.sample_sizes.size(); ++i)
    for (std::size_t rep = 0; rep < r.errors[i].size(); ++rep) {
      std::snprintf(buf, sizeof buf, "%.17g", r.errors[i][rep]);
      out << r.sample_sizes[i] << ',' << (rep + 1) << ',' << buf << '\n';
    }
  return out.str();
}

}  // namespace mcca
