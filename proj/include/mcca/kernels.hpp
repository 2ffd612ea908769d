#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mcca/dataset.hpp"
#include "mcca/error.hpp"
#include "mcca/matrix.hpp"
#include "mcca/stats.hpp"

namespace mcca {

enum class KernelKind { Gaussian, Linear };

struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double gamma = 1.0;  // gaussian only

  static KernelSpec gaussian(double gamma) {
    if (!(gamma > 0.0)) fail(ErrorCode::InvalidValue, "gaussian kernel requires gamma > 0");
    return KernelSpec{KernelKind::Gaussian, gamma};
  }
  static KernelSpec linear() { return KernelSpec{KernelKind::Linear, 0.0}; }
};

inline double squared_frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::ShapeMismatch, "kernel arguments have different shapes");
  double s = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  const std::size_t count = a.rows() * a.cols();
  for (std::size_t i = 0; i < count; ++i) {
    const double d = pa[i] - pb[i];
    s += d * d;
  }
  return s;
}

// exp(−γ‖A−B‖_F²): similarity of two same-shaped measurement blocks.
inline double gaussian_kernel(const Matrix& a, const Matrix& b, double gamma) {
  if (!(gamma > 0.0)) fail(ErrorCode::InvalidValue, "gaussian kernel requires gamma > 0");
  if (!a.all_finite() || !b.all_finite())
    fail(ErrorCode::NonFinite, "kernel argument contains NaN or Inf");
  return std::exp(-gamma * squared_frobenius_distance(a, b));
}

// Frobenius inner product ⟨A, B⟩_F.
inline double linear_kernel(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::ShapeMismatch, "kernel arguments have different shapes");
  if (!a.all_finite() || !b.all_finite())
    fail(ErrorCode::NonFinite, "kernel argument contains NaN or Inf");
  double s = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  const std::size_t count = a.rows() * a.cols();
  for (std::size_t i = 0; i < count; ++i) s += pa[i] * pb[i];
  return s;
}

inline double evaluate_kernel(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  return spec.kind == KernelKind::Gaussian ? gaussian_kernel(a, b, spec.gamma)
                                           : linear_kernel(a, b);
}

// γ = 1 / median{‖A[i]−A[j]‖_F² : i < j}. The median of an even-length list
// is its lower middle element, so the result is always one of the observed
// distances.
inline double median_gamma(const std::vector<Matrix>& blocks) {
  const std::size_t n = blocks.size();
  if (n < 2) fail(ErrorCode::InvalidValue, "median gamma needs at least 2 blocks");
  std::vector<double> d2;
  d2.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d2.push_back(squared_frobenius_distance(blocks[i], blocks[j]));
  std::sort(d2.begin(), d2.end());
  const double med = d2[(d2.size() - 1) / 2];
  if (!(med > 0.0))
    fail(ErrorCode::DegenerateDistances, "median pairwise distance is zero");
  return 1.0 / med;
}

// L raw Gram matrices and their doubly centered versions G̃ = H·G·H with
// H = I − (1/n)𝟙𝟙ᵀ. Centering is computed by subtracting row, column and
// grand means, which equals the matrix product form to rounding.
struct GramSet {
  std::vector<Matrix> raw;
  std::vector<Matrix> centered;
  std::vector<KernelSpec> kernel_specs;

  std::size_t n() const { return raw.empty() ? 0 : raw.front().rows(); }
  std::size_t L() const { return raw.size(); }
};

inline Matrix center_gram(const Matrix& g) {
  const std::size_t n = g.rows();
  Vector row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += g(i, j);
    row_mean[i] = s / static_cast<double>(n);
    grand += s;
  }
  grand /= static_cast<double>(n) * static_cast<double>(n);
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = g(i, j) - row_mean[i] - row_mean[j] + grand;
  symmetrize(out);
  return out;
}

inline GramSet gram_set(const RepeatedMeasuresDataset& ds, const std::vector<KernelSpec>& specs) {
  if (specs.size() != ds.L)
    fail(ErrorCode::DimensionMismatch, "one kernel spec per feature required");
  GramSet out;
  out.kernel_specs = specs;
  out.raw.reserve(ds.L);
  out.centered.reserve(ds.L);
  for (std::size_t l = 0; l < ds.L; ++l) {
    Matrix g(ds.n, ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) {
      for (std::size_t j = i; j < ds.n; ++j) {
        const double v = evaluate_kernel(specs[l], ds.blocks[l][i], ds.blocks[l][j]);
        g(i, j) = v;
        g(j, i) = v;
      }
    }
    out.centered.push_back(center_gram(g));
    out.raw.push_back(std::move(g));
  }
  return out;
}

}  // namespace mcca
