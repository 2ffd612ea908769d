#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mcca/error.hpp"
#include "mcca/matrix.hpp"

namespace mcca {

namespace detail {

// Fixed qualitative palette; groups get colors by first appearance.
inline const char* group_color(std::size_t index) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[index % 10];
}

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace detail

// Scatter of two columns of a score matrix: one point per unit on the
// (U^(i), U^(j)) plane, colored by group when groups are present. 800×600
// canvas with 10% margins; coordinates rounded to 3 decimals so the bytes
// are identical for identical input.
inline std::string scatter_svg(const Matrix& scores, std::size_t i, std::size_t j,
                               const std::vector<std::string>& group_labels) {
  if (i >= scores.cols() || j >= scores.cols())
    fail(ErrorCode::InvalidComponentIndex,
         "scatter axes (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
             ") exceed the " + std::to_string(scores.cols()) + " available columns");
  if (!group_labels.empty() && group_labels.size() != scores.rows())
    fail(ErrorCode::DimensionMismatch, "one group label per unit required");

  const double width = 800.0, height = 600.0;
  const double mx = 0.10 * width, my = 0.10 * height;
  const std::size_t n = scores.rows();

  double xmin = scores(0, i), xmax = scores(0, i);
  double ymin = scores(0, j), ymax = scores(0, j);
  for (std::size_t k = 1; k < n; ++k) {
    xmin = std::min(xmin, scores(k, i));
    xmax = std::max(xmax, scores(k, i));
    ymin = std::min(ymin, scores(k, j));
    ymax = std::max(ymax, scores(k, j));
  }
  // Coinciding points are valid input; widen the window so the map stays defined.
  if (!(xmax > xmin)) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (!(ymax > ymin)) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double sx = (width - 2.0 * mx) / (xmax - xmin);
  const double sy = (height - 2.0 * my) / (ymax - ymin);

  std::vector<std::string> groups;  // distinct labels, first-appearance order
  std::vector<std::size_t> group_of(n, 0);
  if (!group_labels.empty()) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto it = std::find(groups.begin(), groups.end(), group_labels[k]);
      if (it == groups.end()) {
        group_of[k] = groups.size();
        groups.push_back(group_labels[k]);
      } else {
        group_of[k] = static_cast<std::size_t>(it - groups.begin());
      }
    }
  }

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n"
      << "<rect x=\"" << detail::fixed3(mx) << "\" y=\"" << detail::fixed3(my) << "\" width=\""
      << detail::fixed3(width - 2 * mx) << "\" height=\"" << detail::fixed3(height - 2 * my)
      << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";

  const std::string xlabel = "U^(" + std::to_string(i + 1) + ")";
  const std::string ylabel = "U^(" + std::to_string(j + 1) + ")";
  out << "<text x=\"" << detail::fixed3(width / 2) << "\" y=\"" << detail::fixed3(height - my / 3)
      << "\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">"
      << detail::xml_escape(xlabel) << "</text>\n";
  out << "<text x=\"" << detail::fixed3(mx / 3) << "\" y=\"" << detail::fixed3(height / 2)
      << "\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << detail::fixed3(mx / 3) << " " << detail::fixed3(height / 2) << ")\">"
      << detail::xml_escape(ylabel) << "</text>\n";

  for (std::size_t k = 0; k < n; ++k) {
    const double px = mx + (scores(k, i) - xmin) * sx;
    const double py = height - my - (scores(k, j) - ymin) * sy;
    const char* color = group_labels.empty() ? detail::group_color(0)
                                             : detail::group_color(group_of[k]);
    out << "<circle cx=\"" << detail::fixed3(px) << "\" cy=\"" << detail::fixed3(py)
        << "\" r=\"4\" fill=\"" << color << "\" fill-opacity=\"0.8\"/>\n";
  }

  if (!groups.empty()) {
    double ly = my + 14.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const double lx = width - mx - 150.0;
      out << "<circle cx=\"" << detail::fixed3(lx) << "\" cy=\"" << detail::fixed3(ly - 4.0)
          << "\" r=\"4\" fill=\"" << detail::group_color(g) << "\"/>\n"
          << "<text x=\"" << detail::fixed3(lx + 10.0) << "\" y=\"" << detail::fixed3(ly)
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(groups[g])
          << "</text>\n";
      ly += 18.0;
    }
  }
  out << "</svg>\n";
  return out.str();
}

inline void write_scatter(const Matrix& scores, std::size_t i, std::size_t j,
                          const std::vector<std::string>& group_labels,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  out << scatter_svg(scores, i, j, group_labels);
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

}  // namespace mcca
