#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "mcca/dataset.hpp"
#include "mcca/error.hpp"

namespace mcca {

enum class Method { Kernel, Functional };

// Analysis settings shared by both methods. Sentinels resolve against the
// dataset at solve time: kernel_gamma "median" → median pairwise-distance
// heuristic, epsilon "auto" → n^{−1/4} (vanishes with n while n^{1/3}·ε still
// grows, which is the regime the consistency theory needs), hopkins_m "auto"
// → ⌈n/10⌉.
struct AnalysisConfig {
  Method method = Method::Kernel;
  bool gamma_is_median = true;
  double kernel_gamma = 0.0;        // used only when !gamma_is_median
  bool epsilon_is_auto = true;
  double epsilon = 0.0;             // used only when !epsilon_is_auto
  std::size_t n_components = 3;
  std::size_t basis_size = 9;
  bool hopkins_m_is_auto = true;
  std::size_t hopkins_m = 0;        // used only when !hopkins_m_is_auto
  std::size_t hopkins_reps = 100;
  std::int64_t rng_seed = 0;
  bool standardize = false;
};

inline double resolve_epsilon(const AnalysisConfig& cfg, std::size_t n) {
  if (!cfg.epsilon_is_auto) return cfg.epsilon;
  return std::pow(static_cast<double>(n), -0.25);
}

inline std::size_t resolve_hopkins_m(const AnalysisConfig& cfg, std::size_t n) {
  if (!cfg.hopkins_m_is_auto) return cfg.hopkins_m;
  return (n + 9) / 10;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

// Applies one `key = value` assignment. Shared by the config file parser and
// the CLI override flags so both obey identical validation.
inline void apply_config_entry(AnalysisConfig& cfg, const std::string& key,
                               const std::string& value) {
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::InvalidValue, "config key '" + key + "': " + what + " (got '" + value + "')");
  };
  auto parse_positive_real = [&](double& out) {
    if (!csv::parse_double(value, out) || !(out > 0.0) || !std::isfinite(out))
      bad("expected a positive real");
  };
  auto parse_count = [&](std::size_t& out, std::size_t min_value) {
    if (!csv::parse_index(value, out) || out < min_value)
      bad("expected an integer >= " + std::to_string(min_value));
  };

  if (key == "method") {
    if (value == "kernel") cfg.method = Method::Kernel;
    else if (value == "functional") cfg.method = Method::Functional;
    else bad("expected kernel or functional");
  } else if (key == "kernel_gamma") {
    if (value == "median") {
      cfg.gamma_is_median = true;
    } else {
      cfg.gamma_is_median = false;
      parse_positive_real(cfg.kernel_gamma);
    }
  } else if (key == "epsilon") {
    if (value == "auto") {
      cfg.epsilon_is_auto = true;
    } else {
      cfg.epsilon_is_auto = false;
      parse_positive_real(cfg.epsilon);
    }
  } else if (key == "n_components") {
    parse_count(cfg.n_components, 1);
  } else if (key == "basis_size") {
    parse_count(cfg.basis_size, 1);
    if (cfg.basis_size % 2 == 0)
      bad("expected an odd count (constant plus sine/cosine pairs)");
  } else if (key == "hopkins_m") {
    if (value == "auto") {
      cfg.hopkins_m_is_auto = true;
    } else {
      cfg.hopkins_m_is_auto = false;
      parse_count(cfg.hopkins_m, 1);
    }
  } else if (key == "hopkins_reps") {
    parse_count(cfg.hopkins_reps, 1);
  } else if (key == "rng_seed") {
    try {
      std::size_t pos = 0;
      cfg.rng_seed = std::stoll(value, &pos);
      if (pos != value.size()) bad("expected an integer");
    } catch (const std::exception&) {
      bad("expected an integer");
    }
  } else if (key == "standardize") {
    if (value == "true") cfg.standardize = true;
    else if (value == "false") cfg.standardize = false;
    else bad("expected true or false");
  } else {
    fail(ErrorCode::UnknownKey, "unknown config key '" + key + "'");
  }
}

// Flat `key = value` document; `#` starts a comment, blank lines are
// ignored. Unset keys keep their defaults.
inline AnalysisConfig parse_config(const std::string& text) {
  AnalysisConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::InvalidValue,
           "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      fail(ErrorCode::InvalidValue,
           "config line " + std::to_string(line_no) + ": empty key");
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

}  // namespace mcca
