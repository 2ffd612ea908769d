#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcca/config.hpp"
#include "mcca/dataset.hpp"
#include "mcca/error.hpp"
#include "mcca/functional_mcca.hpp"
#include "mcca/hopkins.hpp"
#include "mcca/kernel_mcca.hpp"
#include "mcca/report.hpp"
#include "mcca/svg.hpp"
#include "mcca/synthetic.hpp"

namespace mcca::cli {

namespace detail {

// Config resolution order: defaults, then the config file, then flags.
struct ConfigOverrides {
  std::vector<std::pair<std::string, std::string>> entries;

  void add_flag(CLI::App* cmd, const std::string& flag, const std::string& key,
                const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { entries.emplace_back(key, v); }, help);
  }
};

inline AnalysisConfig resolve_config(const std::string& config_path,
                                     const ConfigOverrides& overrides) {
  AnalysisConfig cfg;
  if (!config_path.empty()) cfg = parse_config(read_text_file(config_path));
  for (const auto& [key, value] : overrides.entries) apply_config_entry(cfg, key, value);
  return cfg;
}

inline void add_common_overrides(CLI::App* cmd, ConfigOverrides& ov) {
  ov.add_flag(cmd, "--epsilon", "epsilon", "regularization (positive real or 'auto')");
  ov.add_flag(cmd, "--n-components", "n_components", "number of components to extract");
  ov.add_flag(cmd, "--rng-seed", "rng_seed", "seed for all random draws");
  ov.add_flag(cmd, "--standardize", "standardize", "per-variable standardization (true|false)");
}

inline RepeatedMeasuresDataset load_dataset(const std::string& path, const AnalysisConfig& cfg) {
  RepeatedMeasuresDataset ds = parse_dataset(read_text_file(path));
  if (cfg.standardize) ds = standardize_dataset(ds);
  return ds;
}

inline void emit_analysis_outputs(const MccaSolution& sol, const RepeatedMeasuresDataset& ds,
                                  const AnalysisConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_report(sol, ds.unit_labels, ds.feature_names, cfg, std::nullopt,
               out_dir + "/report.json");
  write_text_file(out_dir + "/scores.csv", scores_to_csv(sol, ds.unit_labels, ds.feature_names));
  write_scatter(sol.scores.front(), 0, 1, ds.group_labels, out_dir + "/scatter_1_2.svg");
  std::cerr << "wrote " << out_dir << "/report.json, scores.csv, scatter_1_2.svg\n";
}

// Scores CSV (unit,component,feature,score) pivoted to an n×L matrix for one
// component, or a plain numeric matrix, one row per line.
inline Matrix load_point_matrix(const std::string& path, std::size_t component) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::InvalidValue, "empty input " + path);
  const auto header = csv::split_record(line);

  if (header.size() == 4 && header[0] == "unit" && header[1] == "component" &&
      header[2] == "feature" && header[3] == "score") {
    std::vector<std::string> units, features;
    std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const auto fields = csv::split_record(line);
      if (fields.size() != 4)
        fail(ErrorCode::InvalidValue, "line " + std::to_string(line_no) + ": expected 4 fields");
      std::size_t comp = 0;
      double value = 0.0;
      if (!csv::parse_index(fields[1], comp) || comp < 1)
        fail(ErrorCode::NonNumericValue,
             "line " + std::to_string(line_no) + ": component must be a positive integer");
      if (!csv::parse_double(fields[3], value))
        fail(ErrorCode::NonNumericValue,
             "line " + std::to_string(line_no) + ": score is not numeric");
      if (comp != component) continue;
      auto unit_it = std::find(units.begin(), units.end(), fields[0]);
      if (unit_it == units.end()) {
        units.push_back(fields[0]);
        unit_it = units.end() - 1;
      }
      auto feat_it = std::find(features.begin(), features.end(), fields[2]);
      if (feat_it == features.end()) {
        features.push_back(fields[2]);
        feat_it = features.end() - 1;
      }
      cells.emplace_back(unit_it - units.begin(), feat_it - features.begin(), value);
    }
    if (cells.empty())
      fail(ErrorCode::InvalidComponentIndex,
           "no rows for component " + std::to_string(component) + " in " + path);
    Matrix x(units.size(), features.size());
    std::vector<char> seen(units.size() * features.size(), 0);
    for (const auto& [u, f, v] : cells) {
      if (seen[u * features.size() + f])
        fail(ErrorCode::DuplicateCell, "duplicate score for unit " + units[u]);
      seen[u * features.size() + f] = 1;
      x(u, f) = v;
    }
    for (std::size_t idx = 0; idx < seen.size(); ++idx)
      if (!seen[idx])
        fail(ErrorCode::MissingCell,
             "missing score for unit " + units[idx / features.size()] + ", feature " +
                 features[idx % features.size()]);
    return x;
  }

  // Plain numeric matrix: every line is a comma-separated coordinate row.
  std::vector<Vector> rows;
  auto parse_row = [&](const std::vector<std::string>& fields, std::size_t line_no) {
    Vector row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j)
      if (!csv::parse_double(fields[j], row[j]))
        fail(ErrorCode::NonNumericValue, "line " + std::to_string(line_no) +
                                             ": field " + std::to_string(j + 1) +
                                             " is not numeric: '" + fields[j] + "'");
    return row;
  };
  rows.push_back(parse_row(header, 1));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_record(line);
    if (fields.size() != rows.front().size())
      fail(ErrorCode::InvalidValue,
           "line " + std::to_string(line_no) + ": expected " +
               std::to_string(rows.front().size()) + " fields");
    rows.push_back(parse_row(fields, line_no));
  }
  Matrix x(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) x(i, j) = rows[i][j];
  return x;
}

inline std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t v = 0;
    if (!csv::parse_index(item, v) || v < 1)
      fail(ErrorCode::InvalidValue, "expected comma-separated positive integers, got '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorCode::InvalidValue, "expected at least one sample size");
  return out;
}

}  // namespace detail

// Runs one invocation; returns the process exit status (0 success,
// 1 validation/input problem, 2 numerical failure).
inline int run(int argc, const char* const* argv) {
  CLI::App app{"multiple canonical correlation analysis for repeated measures data"};
  app.require_subcommand(1);

  std::string input_path, config_path, out_dir = ".", scores_out;
  detail::ConfigOverrides kcca_ov, fcca_ov, hop_ov;

  CLI::App* kcca = app.add_subcommand(
      "kcca", "multiple kernel CCA (gaussian kernel) on a dataset CSV");
  kcca->add_option("input", input_path, "dataset CSV")->required();
  kcca->add_option("--config", config_path, "key = value config file");
  kcca->add_option("-o,--output", out_dir, "output directory");
  detail::add_common_overrides(kcca, kcca_ov);
  kcca_ov.add_flag(kcca, "--kernel-gamma", "kernel_gamma",
                   "gaussian kernel width (positive real or 'median')");

  CLI::App* fcca = app.add_subcommand(
      "fcca", "multiple functional CCA (Fourier basis smoothing) on a dataset CSV");
  fcca->add_option("input", input_path, "dataset CSV")->required();
  fcca->add_option("--config", config_path, "key = value config file");
  fcca->add_option("-o,--output", out_dir, "output directory");
  detail::add_common_overrides(fcca, fcca_ov);
  fcca_ov.add_flag(fcca, "--basis-size", "basis_size", "odd Fourier basis size");

  CLI::App* hop = app.add_subcommand(
      "hopkins", "Hopkins clusterability statistic on a score CSV or numeric matrix");
  std::size_t hop_component = 1;
  std::string hop_region = "box";
  bool hop_classic = false;
  hop->add_option("input", input_path, "scores CSV (unit,component,feature,score) or numeric matrix")
      ->required();
  hop->add_option("--component", hop_component, "which component's scores to test (default 1)");
  hop->add_option("--region", hop_region, "sampling region: box (default) or hull (d <= 3)");
  hop->add_flag("--classic-d1", hop_classic, "use exponent 1 instead of the ambient dimension");
  hop->add_option("-o,--output", out_dir, "output directory");
  detail::add_common_overrides(hop, hop_ov);
  hop_ov.add_flag(hop, "--m", "hopkins_m", "probe count (integer or 'auto' = ceil(n/10))");
  hop_ov.add_flag(hop, "--reps", "hopkins_reps", "replication count");

  CLI::App* synth = app.add_subcommand("synth", "generate a latent-factor dataset CSV");
  SyntheticSpec spec;
  std::string synth_out = "synthetic.csv";
  synth->add_option("-o,--output", synth_out, "output CSV path");
  synth->add_option("--n", spec.n, "units");
  synth->add_option("--features", spec.L, "feature count");
  synth->add_option("--T", spec.T, "time points");
  synth->add_option("--p", spec.p, "variables per feature");
  synth->add_option("--latent-dim", spec.latent_dim, "latent factor dimension");
  synth->add_option("--loading-scale", spec.loading_scale, "shared-signal strength");
  synth->add_option("--noise-sd", spec.noise_sd, "independent noise level");
  synth->add_option("--seed", spec.seed, "seed (fixes the loading pattern and the sample)");

  CLI::App* conv = app.add_subcommand(
      "convergence", "empirical consistency study on the latent-factor family");
  SyntheticSpec conv_spec;
  std::string conv_sizes = "100,400,1600";
  std::size_t conv_reps = 20;
  std::string conv_method = "kernel";
  std::size_t conv_basis = 5;
  conv->add_option("-o,--output", out_dir, "output directory");
  conv->add_option("--sizes", conv_sizes, "comma-separated increasing sample sizes");
  conv->add_option("--reps", conv_reps, "replications per size");
  conv->add_option("--method", conv_method, "kernel (linear kernel) or functional");
  conv->add_option("--basis-size", conv_basis, "Fourier basis size (functional method)");
  conv->add_option("--features", conv_spec.L, "feature count");
  conv->add_option("--T", conv_spec.T, "time points");
  conv->add_option("--p", conv_spec.p, "variables per feature");
  conv->add_option("--latent-dim", conv_spec.latent_dim, "latent factor dimension");
  conv->add_option("--loading-scale", conv_spec.loading_scale, "shared-signal strength");
  conv->add_option("--noise-sd", conv_spec.noise_sd, "independent noise level");
  conv->add_option("--seed", conv_spec.seed, "population seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (kcca->parsed()) {
      AnalysisConfig cfg = detail::resolve_config(config_path, kcca_ov);
      cfg.method = Method::Kernel;
      const RepeatedMeasuresDataset ds = detail::load_dataset(input_path, cfg);
      const MccaSolution sol = solve_kernel_mcca(ds, cfg);
      detail::emit_analysis_outputs(sol, ds, cfg, out_dir);
    } else if (fcca->parsed()) {
      AnalysisConfig cfg = detail::resolve_config(config_path, fcca_ov);
      cfg.method = Method::Functional;
      const RepeatedMeasuresDataset ds = detail::load_dataset(input_path, cfg);
      const BasisSpec basis(cfg.basis_size);
      const MccaSolution sol =
          solve_functional_mcca(ds, basis, resolve_epsilon(cfg, ds.n), cfg.n_components);
      detail::emit_analysis_outputs(sol, ds, cfg, out_dir);
      write_text_file(out_dir + "/weights.csv",
                      weight_curves_to_csv(sol, basis, ds.p, ds.feature_names));
      std::cerr << "wrote " << out_dir << "/weights.csv\n";
    } else if (hop->parsed()) {
      AnalysisConfig cfg = detail::resolve_config(config_path, hop_ov);
      const Matrix x = detail::load_point_matrix(input_path, hop_component);
      Region region = Region::bounding_box();
      if (hop_region == "hull")
        region = Region::convex_hull();
      else if (hop_region != "box")
        fail(ErrorCode::InvalidValue, "region must be box or hull, got '" + hop_region + "'");
      const HopkinsResult result =
          hopkins(x, resolve_hopkins_m(cfg, x.rows()), cfg.hopkins_reps,
                  static_cast<std::uint64_t>(cfg.rng_seed), region, hop_classic);
      std::filesystem::create_directories(out_dir);
      write_text_file(out_dir + "/hopkins.json", hopkins_to_json(result).dump(2) + "\n");
      std::cerr << "wrote " << out_dir << "/hopkins.json (H = " << result.H << ")\n";
    } else if (synth->parsed()) {
      const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
      write_text_file(synth_out, serialize_dataset(ds));
      std::cerr << "wrote " << synth_out << "\n";
    } else if (conv->parsed()) {
      Method method = Method::Kernel;
      if (conv_method == "functional")
        method = Method::Functional;
      else if (conv_method != "kernel")
        fail(ErrorCode::InvalidValue, "method must be kernel or functional, got '" + conv_method + "'");
      const ConvergenceReport report = convergence_study(
          conv_spec, detail::parse_size_list(conv_sizes), conv_reps, method, conv_basis);
      std::filesystem::create_directories(out_dir);
      write_text_file(out_dir + "/convergence.json", convergence_to_json(report).dump(2) + "\n");
      write_text_file(out_dir + "/errors.csv", convergence_errors_to_csv(report));
      std::cerr << "wrote " << out_dir << "/convergence.json, errors.csv\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Numerical ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace mcca::cli
