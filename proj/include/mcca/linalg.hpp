#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "mcca/error.hpp"
#include "mcca/matrix.hpp"

namespace mcca {

struct SymEigen {
  Vector eigenvalues;  // sorted descending
  Matrix eigenvectors; // orthonormal columns, same order
};

namespace detail {

// One cyclic Jacobi sweep over the strict upper triangle. A is overwritten
// with the rotated matrix (kept symmetric), V accumulates the rotations.
inline void jacobi_sweep(Matrix& a, Matrix& v, double skip_threshold) {
  const std::size_t n = a.rows();
  for (std::size_t p = 0; p + 1 < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const double apq = a(p, q);
      if (std::abs(apq) <= skip_threshold) continue;
      const double app = a(p, p);
      const double aqq = a(q, q);
      const double theta = (aqq - app) / (2.0 * apq);
      // Smaller root of t² + 2θt − 1 = 0: the rotation angle stays ≤ π/4,
      // which is what makes Jacobi unconditionally convergent.
      const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                       (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      const double tau = s / (1.0 + c);

      a(p, p) = app - t * apq;
      a(q, q) = aqq + t * apq;
      a(p, q) = 0.0;
      a(q, p) = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == p || k == q) continue;
        const double akp = a(k, p);
        const double akq = a(k, q);
        const double np = akp - s * (akq + tau * akp);
        const double nq = akq + s * (akp - tau * akq);
        a(k, p) = np;
        a(p, k) = np;
        a(k, q) = nq;
        a(q, k) = nq;
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double vkp = v(k, p);
        const double vkq = v(k, q);
        v(k, p) = vkp - s * (vkq + tau * vkp);
        v(k, q) = vkq + s * (vkp - tau * vkq);
      }
    }
  }
}

inline double offdiag_frobenius(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Flips each column so its largest-magnitude entry is positive; keeps
// output stable across platforms and reruns.
inline void fix_column_signs(Matrix& v) {
  for (std::size_t j = 0; j < v.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v.rows(); ++i) {
      const double m = std::abs(v(i, j));
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    if (v(arg, j) < 0.0)
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
  }
}

inline void fix_vector_sign(Vector& w) {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double m = std::abs(w[i]);
    if (m > best) {
      best = m;
      arg = i;
    }
  }
  if (w[arg] < 0.0)
    for (double& x : w) x = -x;
}

}  // namespace detail

// Cyclic Jacobi eigensolver for symmetric matrices. Converges when the
// off-diagonal Frobenius norm drops below 1e-12·‖A‖; ties in the descending
// eigenvalue order are broken by the position the value came out of the
// diagonal (stable sort), so repeated eigenvalues keep a deterministic order.
inline SymEigen sym_eig(const Matrix& a_in) {
  if (a_in.rows() != a_in.cols())
    fail(ErrorCode::DimensionMismatch, "sym_eig requires a square matrix");
  if (!a_in.all_finite())
    fail(ErrorCode::NonFinite, "sym_eig input contains NaN or Inf");
  if (relative_asymmetry(a_in) > 1e-12)
    fail(ErrorCode::NotSymmetric, "sym_eig input asymmetry exceeds 1e-12 relative");

  const std::size_t n = a_in.rows();
  Matrix a = a_in;
  symmetrize(a);
  Matrix v = Matrix::identity(n);
  const double norm = a.frobenius_norm();
  const double stop = 1e-12 * norm;

  if (n > 1 && norm > 0.0) {
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      const double off = detail::offdiag_frobenius(a);
      if (off <= stop) break;
      // Skip rotations that cannot move the off-diagonal mass meaningfully;
      // the bound keeps the sweep O(n²) once the matrix is nearly diagonal.
      const double skip = off / (static_cast<double>(n) * n * 10.0);
      detail::jacobi_sweep(a, v, std::min(skip, stop));
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymEigen out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
  }
  detail::fix_column_signs(out.eigenvectors);
  return out;
}

struct InvSqrtResult {
  Matrix matrix;
  std::size_t retained_rank = 0;
};

// V_r·diag(λ_r^{−1/2})·V_rᵀ over the eigenvalues above truncation_tol·λ_max.
// Spectral truncation, not jitter: singular directions are dropped outright.
inline InvSqrtResult inv_sqrt_psd(const Matrix& a, double truncation_tol = 1e-10) {
  const SymEigen eig = sym_eig(a);
  const std::size_t n = a.rows();
  const double lambda_max = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.front();
  if (!(lambda_max > 0.0))
    fail(ErrorCode::AllTruncated, "matrix has no positive eigenvalue");
  const double cut = truncation_tol * lambda_max;

  InvSqrtResult out;
  out.matrix = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = eig.eigenvalues[k];
    if (!(lam > cut)) continue;
    ++out.retained_rank;
    const double inv_sqrt = 1.0 / std::sqrt(lam);
    for (std::size_t i = 0; i < n; ++i) {
      const double vik = eig.eigenvectors(i, k) * inv_sqrt;
      if (vik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j)
        out.matrix(i, j) += vik * eig.eigenvectors(j, k);
    }
  }
  if (out.retained_rank == 0)
    fail(ErrorCode::AllTruncated, "all eigenvalues below the truncation threshold");
  return out;
}

struct GeneralizedEigenSolution {
  Vector eigenvalues;          // descending
  std::vector<Vector> right_vectors;
  std::size_t deflated_rank = 0;
  std::vector<bool> degenerate; // per returned pair: near-tie with a neighbor
};

namespace detail {

// Marks eigenvalues that sit within 1e-8·|λ_1| of a neighbor. Eigenvectors
// inside such a cluster are an arbitrary basis of the shared eigenspace.
inline std::vector<bool> degeneracy_flags(const Vector& all_values, std::size_t k) {
  std::vector<bool> flags(k, false);
  if (all_values.empty()) return flags;
  const double tol = 1e-8 * std::abs(all_values.front());
  for (std::size_t i = 0; i < k; ++i) {
    const bool prev = i > 0 && std::abs(all_values[i - 1] - all_values[i]) < tol;
    const bool next =
        i + 1 < all_values.size() && std::abs(all_values[i] - all_values[i + 1]) < tol;
    flags[i] = prev || next;
  }
  return flags;
}

}  // namespace detail

// Solves M·w = λ·B·w for symmetric M and symmetric PSD (possibly singular) B
// by whitening on the retained range of B: with S = V_r·Λ_r^{−1/2}, the
// reduced problem SᵀMS·f = λ·f is an ordinary symmetric eigenproblem and
// w = S·f. Returns min(k, rank) pairs, eigenvalues descending.
inline GeneralizedEigenSolution solve_generalized_sym(const Matrix& m, const Matrix& b,
                                                      double truncation_tol = 1e-10,
                                                      std::size_t k = SIZE_MAX) {
  if (m.rows() != m.cols() || b.rows() != b.cols() || m.rows() != b.rows())
    fail(ErrorCode::DimensionMismatch, "generalized eigenproblem shape mismatch");
  if (!m.all_finite() || !b.all_finite())
    fail(ErrorCode::NonFinite, "generalized eigenproblem input contains NaN or Inf");
  if (relative_asymmetry(m) > 1e-12)
    fail(ErrorCode::NotSymmetric, "left-hand matrix is not symmetric");

  const std::size_t n = b.rows();
  const SymEigen beig = sym_eig(b);
  const double lambda_max = beig.eigenvalues.empty() ? 0.0 : beig.eigenvalues.front();
  if (!(lambda_max > 0.0))
    fail(ErrorCode::AllTruncated, "right-hand matrix has no positive eigenvalue");
  const double cut = truncation_tol * lambda_max;

  std::size_t r = 0;
  while (r < n && beig.eigenvalues[r] > cut) ++r;
  if (r == 0)
    fail(ErrorCode::AllTruncated, "right-hand matrix fully truncated");

  Matrix s(n, r);
  for (std::size_t j = 0; j < r; ++j) {
    const double f = 1.0 / std::sqrt(beig.eigenvalues[j]);
    for (std::size_t i = 0; i < n; ++i) s(i, j) = beig.eigenvectors(i, j) * f;
  }

  Matrix w = transpose_times(s, m * s);
  symmetrize(w);
  const SymEigen weig = sym_eig(w);

  GeneralizedEigenSolution out;
  out.deflated_rank = r;
  const std::size_t kk = std::min(k, r);
  out.eigenvalues.assign(weig.eigenvalues.begin(), weig.eigenvalues.begin() + kk);
  out.degenerate = detail::degeneracy_flags(weig.eigenvalues, kk);
  out.right_vectors.reserve(kk);
  for (std::size_t j = 0; j < kk; ++j) {
    Vector wj(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t t = 0; t < r; ++t) acc += s(i, t) * weig.eigenvectors(t, j);
      wj[i] = acc;
    }
    detail::fix_vector_sign(wj);
    out.right_vectors.push_back(std::move(wj));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Block-structured generalized eigenproblem. Both MCCA variants produce a
// pencil whose right-hand matrix is block diagonal with L symmetric PSD
// blocks and whose left-hand matrix has zero diagonal blocks. Whitening can
// then run per block, and the reduced matrix is assembled from far smaller
// pieces than the full Ln×Ln pair. Results agree with solve_generalized_sym
// on the assembled matrices (tested); this path just avoids the big Jacobi.

// Spectral form of one diagonal block of B: B_l = Q·diag(d)·Qᵀ.
struct BlockSpectral {
  Matrix q;
  Vector d;
};

struct BlockSolution {
  Vector eigenvalues;  // descending, min(k, total rank) entries
  // weights[c][l]: component c's weight vector for block l (length = block dim)
  std::vector<std::vector<Vector>> weights;
  std::size_t deflated_rank = 0;
  std::vector<std::size_t> block_ranks;
  std::vector<bool> degenerate;
};

// m_block(i, j) must return the (i, j) off-diagonal block of the left-hand
// matrix (i ≠ j, dimensions dim_i × dim_j).
inline BlockSolution solve_block_generalized(
    const std::vector<BlockSpectral>& b_blocks,
    const std::function<Matrix(std::size_t, std::size_t)>& m_block,
    double truncation_tol = 1e-10, std::size_t k = SIZE_MAX) {
  const std::size_t blocks = b_blocks.size();
  double lambda_max = 0.0;
  for (const auto& b : b_blocks)
    for (double d : b.d) lambda_max = std::max(lambda_max, d);
  if (!(lambda_max > 0.0))
    fail(ErrorCode::AllTruncated, "right-hand blocks have no positive eigenvalue");
  const double cut = truncation_tol * lambda_max;

  // Per-block whitening factors S_l = Q_r·diag(d_r^{−1/2}).
  std::vector<Matrix> s(blocks);
  std::vector<std::size_t> ranks(blocks, 0);
  std::size_t total_rank = 0;
  for (std::size_t l = 0; l < blocks; ++l) {
    const std::size_t dim = b_blocks[l].q.rows();
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < b_blocks[l].d.size(); ++j)
      if (b_blocks[l].d[j] > cut) keep.push_back(j);
    ranks[l] = keep.size();
    total_rank += keep.size();
    Matrix sl(dim, keep.size());
    for (std::size_t jj = 0; jj < keep.size(); ++jj) {
      const double f = 1.0 / std::sqrt(b_blocks[l].d[keep[jj]]);
      for (std::size_t i = 0; i < dim; ++i) sl(i, jj) = b_blocks[l].q(i, keep[jj]) * f;
    }
    s[l] = std::move(sl);
  }
  if (total_rank == 0)
    fail(ErrorCode::AllTruncated, "right-hand blocks fully truncated");

  std::vector<std::size_t> offset(blocks + 1, 0);
  for (std::size_t l = 0; l < blocks; ++l) offset[l + 1] = offset[l] + ranks[l];

  Matrix w(total_rank, total_rank);
  for (std::size_t i = 0; i < blocks; ++i) {
    if (ranks[i] == 0) continue;
    for (std::size_t j = i + 1; j < blocks; ++j) {
      if (ranks[j] == 0) continue;
      const Matrix wij = transpose_times(s[i], m_block(i, j) * s[j]);
      for (std::size_t a = 0; a < ranks[i]; ++a)
        for (std::size_t b = 0; b < ranks[j]; ++b) {
          w(offset[i] + a, offset[j] + b) = wij(a, b);
          w(offset[j] + b, offset[i] + a) = wij(a, b);
        }
    }
  }
  const SymEigen weig = sym_eig(w);

  BlockSolution out;
  out.deflated_rank = total_rank;
  out.block_ranks = ranks;
  const std::size_t kk = std::min(k, total_rank);
  out.eigenvalues.assign(weig.eigenvalues.begin(), weig.eigenvalues.begin() + kk);
  out.degenerate = detail::degeneracy_flags(weig.eigenvalues, kk);
  out.weights.resize(kk);
  for (std::size_t c = 0; c < kk; ++c) {
    out.weights[c].resize(blocks);
    // Sign convention applies to the concatenated vector, matching what the
    // dense solver would do on the stacked pencil.
    double best = -1.0;
    double sign_entry = 1.0;
    for (std::size_t l = 0; l < blocks; ++l) {
      const std::size_t dim = s[l].rows();
      Vector wl(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        for (std::size_t t = 0; t < ranks[l]; ++t)
          acc += s[l](i, t) * weig.eigenvectors(offset[l] + t, c);
        wl[i] = acc;
        if (std::abs(acc) > best) {
          best = std::abs(acc);
          sign_entry = acc;
        }
      }
      out.weights[c][l] = std::move(wl);
    }
    if (sign_entry < 0.0)
      for (auto& wl : out.weights[c])
        for (double& x : wl) x = -x;
  }
  return out;
}

}  // namespace mcca
