#pragma once

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcca/error.hpp"
#include "mcca/matrix.hpp"

namespace mcca {

// n experimental units, L features; unit k's measurement of feature l is a
// T×p_l matrix (T time points, p_l variables observed per time point).
struct RepeatedMeasuresDataset {
  std::size_t n = 0;
  std::size_t L = 0;
  std::size_t T = 0;
  std::vector<std::size_t> p;                    // per-feature variable count
  std::vector<std::vector<Matrix>> blocks;       // blocks[l][k]: T×p_l
  std::vector<std::string> unit_labels;          // n entries
  std::vector<std::string> group_labels;         // empty or n entries
  std::vector<std::string> feature_names;        // L entries

  bool has_groups() const { return !group_labels.empty(); }
};

inline void validate_dataset(const RepeatedMeasuresDataset& ds) {
  if (ds.L < 2) fail(ErrorCode::InvalidValue, "at least 2 features required, got " + std::to_string(ds.L));
  if (ds.n < 3) fail(ErrorCode::InvalidValue, "at least 3 units required, got " + std::to_string(ds.n));
  if (ds.T < 1) fail(ErrorCode::InvalidValue, "at least 1 time point required");
  if (ds.p.size() != ds.L || ds.blocks.size() != ds.L ||
      ds.unit_labels.size() != ds.n || ds.feature_names.size() != ds.L ||
      (!ds.group_labels.empty() && ds.group_labels.size() != ds.n))
    fail(ErrorCode::InconsistentShape, "dataset field sizes disagree");
  for (std::size_t l = 0; l < ds.L; ++l) {
    if (ds.p[l] < 1) fail(ErrorCode::InvalidValue, "feature " + ds.feature_names[l] + " has no variables");
    if (ds.blocks[l].size() != ds.n)
      fail(ErrorCode::InconsistentShape, "feature " + ds.feature_names[l] + " has wrong unit count");
    for (std::size_t k = 0; k < ds.n; ++k) {
      const Matrix& b = ds.blocks[l][k];
      if (b.rows() != ds.T || b.cols() != ds.p[l])
        fail(ErrorCode::InconsistentShape,
             "block (" + ds.feature_names[l] + ", " + ds.unit_labels[k] + ") has wrong shape");
      if (!b.all_finite())
        fail(ErrorCode::NonFinite,
             "block (" + ds.feature_names[l] + ", " + ds.unit_labels[k] + ") contains NaN or Inf");
    }
  }
}

namespace csv {

// Splits one CSV record. Supports double-quoted fields with "" escapes; no
// embedded newlines (the formats written here never produce them).
inline std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::string quote_field(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    out += ch;
  }
  out += '"';
  return out;
}

inline bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end && begin < end;
}

inline bool parse_index(const std::string& text, std::size_t& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end && begin < end;
}

}  // namespace csv

// Long-format CSV: header `unit,feature,time,variable,value[,group]`, one
// measurement per row. Units, features and groups are arbitrary strings and
// get their indices from first appearance; time and variable are 1-based
// integer indices. Every (unit, feature, time, variable) combination implied
// by the cross product must be present exactly once.
inline RepeatedMeasuresDataset parse_dataset(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::InvalidValue, "empty dataset file");
  auto header = csv::split_record(line);
  const bool has_group = header.size() == 6 && header[5] == "group";
  if (!((header.size() == 5 || has_group) && header[0] == "unit" && header[1] == "feature" &&
        header[2] == "time" && header[3] == "variable" && header[4] == "value"))
    fail(ErrorCode::InvalidValue,
         "expected header unit,feature,time,variable,value[,group]");

  struct Cell {
    std::size_t unit, feature, time, variable;
    double value;
  };
  std::vector<Cell> cells;
  std::vector<std::string> unit_labels, feature_names;
  std::unordered_map<std::string, std::size_t> unit_index, feature_index;
  std::vector<std::string> group_of_unit;
  std::size_t line_no = 1;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = csv::split_record(line);
    if (fields.size() != header.size())
      fail(ErrorCode::InvalidValue,
           "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
               " fields, got " + std::to_string(fields.size()));

    Cell cell{};
    auto unit_it = unit_index.find(fields[0]);
    if (unit_it == unit_index.end()) {
      unit_it = unit_index.emplace(fields[0], unit_labels.size()).first;
      unit_labels.push_back(fields[0]);
      group_of_unit.push_back(has_group ? fields[5] : std::string());
    } else if (has_group && group_of_unit[unit_it->second] != fields[5]) {
      fail(ErrorCode::InconsistentShape,
           "unit " + fields[0] + " appears with two different groups");
    }
    cell.unit = unit_it->second;

    auto feat_it = feature_index.find(fields[1]);
    if (feat_it == feature_index.end()) {
      feat_it = feature_index.emplace(fields[1], feature_names.size()).first;
      feature_names.push_back(fields[1]);
    }
    cell.feature = feat_it->second;

    if (!csv::parse_index(fields[2], cell.time) || cell.time < 1)
      fail(ErrorCode::NonNumericValue,
           "line " + std::to_string(line_no) + ": time must be a positive integer, got '" +
               fields[2] + "'");
    if (!csv::parse_index(fields[3], cell.variable) || cell.variable < 1)
      fail(ErrorCode::NonNumericValue,
           "line " + std::to_string(line_no) + ": variable must be a positive integer, got '" +
               fields[3] + "'");
    if (!csv::parse_double(fields[4], cell.value))
      fail(ErrorCode::NonNumericValue,
           "line " + std::to_string(line_no) + ": value is not numeric: '" + fields[4] + "'");
    cells.push_back(cell);
  }

  const std::size_t n = unit_labels.size();
  const std::size_t L = feature_names.size();
  if (L < 2) fail(ErrorCode::InvalidValue, "at least 2 features required, got " + std::to_string(L));
  if (n < 3) fail(ErrorCode::InvalidValue, "at least 3 units required, got " + std::to_string(n));

  std::size_t T = 0;
  std::vector<std::size_t> p(L, 0);
  for (const Cell& c : cells) {
    T = std::max(T, c.time);
    p[c.feature] = std::max(p[c.feature], c.variable);
  }

  // The variable set of a feature must not differ across units: detect a
  // unit whose maximal variable index for some feature falls short before
  // reporting generic missing cells.
  std::vector<std::vector<std::size_t>> max_var(L, std::vector<std::size_t>(n, 0));
  for (const Cell& c : cells)
    max_var[c.feature][c.unit] = std::max(max_var[c.feature][c.unit], c.variable);
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t k = 0; k < n; ++k)
      if (max_var[l][k] != p[l] && max_var[l][k] != 0)
        fail(ErrorCode::InconsistentShape,
             "feature " + feature_names[l] + " has " + std::to_string(max_var[l][k]) +
                 " variables for unit " + unit_labels[k] + " but " + std::to_string(p[l]) +
                 " elsewhere");

  RepeatedMeasuresDataset ds;
  ds.n = n;
  ds.L = L;
  ds.T = T;
  ds.p = p;
  ds.unit_labels = unit_labels;
  ds.feature_names = feature_names;
  ds.blocks.assign(L, {});
  for (std::size_t l = 0; l < L; ++l)
    ds.blocks[l].assign(n, Matrix(T, p[l]));

  std::vector<std::vector<std::vector<char>>> seen(L);
  for (std::size_t l = 0; l < L; ++l)
    seen[l].assign(n, std::vector<char>(T * p[l], 0));

  for (const Cell& c : cells) {
    char& mark = seen[c.feature][c.unit][(c.time - 1) * p[c.feature] + (c.variable - 1)];
    if (mark)
      fail(ErrorCode::DuplicateCell,
           "duplicate measurement (unit " + unit_labels[c.unit] + ", feature " +
               feature_names[c.feature] + ", time " + std::to_string(c.time) + ", variable " +
               std::to_string(c.variable) + ")");
    mark = 1;
    ds.blocks[c.feature][c.unit](c.time - 1, c.variable - 1) = c.value;
  }

  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t v = 0; v < p[l]; ++v)
          if (!seen[l][k][t * p[l] + v])
            fail(ErrorCode::MissingCell,
                 "missing measurement (unit " + unit_labels[k] + ", feature " +
                     feature_names[l] + ", time " + std::to_string(t + 1) + ", variable " +
                     std::to_string(v + 1) + ")");

  bool any_group = false;
  for (const auto& g : group_of_unit) any_group = any_group || !g.empty();
  if (any_group) ds.group_labels = group_of_unit;

  validate_dataset(ds);
  return ds;
}

inline std::string serialize_dataset(const RepeatedMeasuresDataset& ds) {
  std::ostringstream out;
  out << "unit,feature,time,variable,value";
  if (ds.has_groups()) out << ",group";
  out << '\n';
  char buf[64];
  for (std::size_t k = 0; k < ds.n; ++k)
    for (std::size_t l = 0; l < ds.L; ++l)
      for (std::size_t t = 0; t < ds.T; ++t)
        for (std::size_t v = 0; v < ds.p[l]; ++v) {
          std::snprintf(buf, sizeof buf, "%.17g", ds.blocks[l][k](t, v));
          out << csv::quote_field(ds.unit_labels[k]) << ','
              << csv::quote_field(ds.feature_names[l]) << ',' << (t + 1) << ',' << (v + 1)
              << ',' << buf;
          if (ds.has_groups()) out << ',' << csv::quote_field(ds.group_labels[k]);
          out << '\n';
        }
  return out.str();
}

// Per-(feature, variable) standardization across all units and time points:
// subtract the mean, divide by the sample standard deviation. A variable
// with zero spread is only centered.
inline RepeatedMeasuresDataset standardize_dataset(RepeatedMeasuresDataset ds) {
  for (std::size_t l = 0; l < ds.L; ++l) {
    for (std::size_t v = 0; v < ds.p[l]; ++v) {
      const double count = static_cast<double>(ds.n * ds.T);
      double mean = 0.0;
      for (std::size_t k = 0; k < ds.n; ++k)
        for (std::size_t t = 0; t < ds.T; ++t) mean += ds.blocks[l][k](t, v);
      mean /= count;
      double ss = 0.0;
      for (std::size_t k = 0; k < ds.n; ++k)
        for (std::size_t t = 0; t < ds.T; ++t) {
          const double d = ds.blocks[l][k](t, v) - mean;
          ss += d * d;
        }
      const double sd = count > 1.0 ? std::sqrt(ss / (count - 1.0)) : 0.0;
      const double inv = sd > 0.0 ? 1.0 / sd : 1.0;
      for (std::size_t k = 0; k < ds.n; ++k)
        for (std::size_t t = 0; t < ds.T; ++t)
          ds.blocks[l][k](t, v) = (ds.blocks[l][k](t, v) - mean) * inv;
    }
  }
  return ds;
}

}  // namespace mcca
