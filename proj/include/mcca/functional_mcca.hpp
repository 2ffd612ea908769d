#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mcca/config.hpp"
#include "mcca/dataset.hpp"
#include "mcca/error.hpp"
#include "mcca/fourier.hpp"
#include "mcca/kernel_mcca.hpp"
#include "mcca/linalg.hpp"
#include "mcca/matrix.hpp"

namespace mcca {

// Basis coefficients of every (unit, feature) block. coeffs[l] is n×(p_l·B),
// row k holding unit k's coefficients variable-major: all B coefficients of
// variable 1, then variable 2, and so on.
struct CoefficientSet {
  std::vector<Matrix> coeffs;
  BasisSpec basis;
  std::vector<std::size_t> p;
};

namespace detail {

// Least-squares smoother (ΨᵀΨ)^{−1}Ψᵀ for the shared design matrix; computed
// once per dataset and applied to every variable column.
inline Matrix smoother_matrix(std::size_t basis_size, std::size_t T) {
  if (T < basis_size)
    fail(ErrorCode::UnderdeterminedFit,
         "T = " + std::to_string(T) + " time points cannot determine basis_size = " +
             std::to_string(basis_size) + " coefficients");
  const Matrix psi = basis_design_matrix(basis_size, T);
  Matrix gram = transpose_times(psi, psi);
  symmetrize(gram);
  const SymEigen eig = sym_eig(gram);
  const double lam_max = eig.eigenvalues.front();
  const double lam_min = eig.eigenvalues.back();
  if (!(lam_min > 0.0) || lam_max / lam_min > 1e12)
    fail(ErrorCode::SingularDesign,
         "basis design matrix is numerically singular on this grid (condition > 1e12)");
  // (ΨᵀΨ)^{−1}Ψᵀ assembled in the eigenbasis.
  Matrix inv(basis_size, basis_size);
  for (std::size_t t = 0; t < basis_size; ++t) {
    const double f = 1.0 / eig.eigenvalues[t];
    for (std::size_t i = 0; i < basis_size; ++i)
      for (std::size_t j = 0; j < basis_size; ++j)
        inv(i, j) += eig.eigenvectors(i, t) * f * eig.eigenvectors(j, t);
  }
  return inv * psi.transposed();
}

}  // namespace detail

// Least-squares coefficients of one T×p block, concatenated variable-major.
inline Vector smooth_block(const Matrix& a, const BasisSpec& basis) {
  const Matrix k = detail::smoother_matrix(basis.size, a.rows());
  Vector out(a.cols() * basis.size, 0.0);
  for (std::size_t v = 0; v < a.cols(); ++v)
    for (std::size_t b = 0; b < basis.size; ++b) {
      double acc = 0.0;
      for (std::size_t t = 0; t < a.rows(); ++t) acc += k(b, t) * a(t, v);
      out[v * basis.size + b] = acc;
    }
  return out;
}

inline CoefficientSet smooth_dataset(const RepeatedMeasuresDataset& ds, const BasisSpec& basis) {
  validate_dataset(ds);
  const Matrix k = detail::smoother_matrix(basis.size, ds.T);
  CoefficientSet out{std::vector<Matrix>(), basis, ds.p};
  out.coeffs.reserve(ds.L);
  for (std::size_t l = 0; l < ds.L; ++l) {
    Matrix c(ds.n, ds.p[l] * basis.size);
    for (std::size_t unit = 0; unit < ds.n; ++unit) {
      const Matrix& a = ds.blocks[l][unit];
      for (std::size_t v = 0; v < ds.p[l]; ++v)
        for (std::size_t b = 0; b < basis.size; ++b) {
          double acc = 0.0;
          for (std::size_t t = 0; t < ds.T; ++t) acc += k(b, t) * a(t, v);
          c(unit, v * basis.size + b) = acc;
        }
    }
    out.coeffs.push_back(std::move(c));
  }
  return out;
}

// All pairwise coefficient covariance blocks, 1/(n−1)-normalized, with
// 𝒞̂_{j,i} stored as the exact transpose of 𝒞̂_{i,j}.
struct CoeffCovariances {
  std::size_t L = 0;
  std::vector<std::vector<Matrix>> blocks;  // blocks[i][j]
  std::vector<Vector> means;                // per-feature mean coefficient vector
  std::size_t n = 0;
};

inline CoeffCovariances coeff_covariances(const CoefficientSet& coeffs) {
  const std::size_t L = coeffs.coeffs.size();
  if (L == 0) fail(ErrorCode::InvalidValue, "no coefficient blocks");
  const std::size_t n = coeffs.coeffs.front().rows();
  if (n < 2) fail(ErrorCode::InsufficientUnits, "covariance needs at least 2 units");

  CoeffCovariances out;
  out.L = L;
  out.n = n;
  out.means.resize(L);
  std::vector<Matrix> centered(L);
  for (std::size_t l = 0; l < L; ++l) {
    const Matrix& c = coeffs.coeffs[l];
    Vector mean(c.cols(), 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < c.cols(); ++j) mean[j] += c(k, j);
    for (double& v : mean) v /= static_cast<double>(n);
    Matrix cc = c;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < c.cols(); ++j) cc(k, j) -= mean[j];
    out.means[l] = std::move(mean);
    centered[l] = std::move(cc);
  }
  out.blocks.assign(L, std::vector<Matrix>(L));
  const double scale = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = i; j < L; ++j) {
      Matrix cij = transpose_times(centered[i], centered[j]);
      cij.scale(scale);
      if (i == j) symmetrize(cij);
      out.blocks[j][i] = cij.transposed();
      out.blocks[i][j] = std::move(cij);
    }
  return out;
}

// M has zero diagonal blocks and 𝒞̂_{i,j} off the diagonal; B is block
// diagonal with 𝒞̂_{i,i} + ε·I.
inline std::pair<Matrix, Matrix> assemble_functional_problem(const CoeffCovariances& covs,
                                                             double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidValue, "epsilon must be positive");
  std::vector<std::size_t> offset(covs.L + 1, 0);
  for (std::size_t l = 0; l < covs.L; ++l)
    offset[l + 1] = offset[l] + covs.blocks[l][l].rows();
  const std::size_t total = offset[covs.L];
  Matrix m(total, total);
  Matrix b(total, total);
  for (std::size_t i = 0; i < covs.L; ++i) {
    if (!covs.blocks[i][i].all_finite())
      fail(ErrorCode::NonFinite, "coefficient covariance contains NaN or Inf");
    Matrix bii = covs.blocks[i][i];
    for (std::size_t r = 0; r < bii.rows(); ++r) bii(r, r) += epsilon;
    b.set_block(offset[i], offset[i], bii);
    for (std::size_t j = 0; j < covs.L; ++j) {
      if (i == j) continue;
      if (!covs.blocks[i][j].all_finite())
        fail(ErrorCode::NonFinite, "coefficient covariance contains NaN or Inf");
      m.set_block(offset[i], offset[j], covs.blocks[i][j]);
    }
  }
  return {std::move(m), std::move(b)};
}

// Multiple functional CCA: smooth, estimate covariances, solve the pencil,
// rescale to Σ_l w_lᵀ(𝒞̂_{l,l}+εI)w_l = L, and score units by
// U^(l)(k) = w_lᵀ(ĉ_l[k] − c̄_l). Scores are centered so the two methods'
// outputs are directly comparable.
inline MccaSolution solve_functional_mcca(const RepeatedMeasuresDataset& ds,
                                          const BasisSpec& basis, double epsilon,
                                          std::size_t k) {
  if (k < 1) fail(ErrorCode::InvalidValue, "at least one component must be requested");
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidValue, "epsilon must be positive");
  const CoefficientSet coeffs = smooth_dataset(ds, basis);
  const CoeffCovariances covs = coeff_covariances(coeffs);

  const std::size_t L = covs.L;
  std::vector<BlockSpectral> b_blocks(L);
  for (std::size_t l = 0; l < L; ++l) {
    const SymEigen eig = sym_eig(covs.blocks[l][l]);
    Vector d = eig.eigenvalues;
    for (double& v : d) v += epsilon;
    b_blocks[l] = BlockSpectral{eig.eigenvectors, std::move(d)};
  }
  auto m_block = [&](std::size_t i, std::size_t j) { return covs.blocks[i][j]; };
  BlockSolution bs = solve_block_generalized(b_blocks, m_block, 1e-10, k);
  if (bs.eigenvalues.size() < k)
    fail(ErrorCode::InsufficientRank,
         "only " + std::to_string(bs.eigenvalues.size()) + " components available, " +
             std::to_string(k) + " requested");

  MccaSolution sol;
  sol.method = Method::Functional;
  sol.epsilon_used = epsilon;
  sol.correlations = bs.eigenvalues;
  sol.diagnostics.deflated_rank = bs.deflated_rank;
  sol.diagnostics.block_ranks = bs.block_ranks;
  sol.diagnostics.degenerate = bs.degenerate;

  const std::size_t n = ds.n;
  const double rescale = std::sqrt(static_cast<double>(L));
  sol.weights.resize(bs.eigenvalues.size());
  sol.scores.reserve(bs.eigenvalues.size());
  for (std::size_t c = 0; c < bs.eigenvalues.size(); ++c) {
    sol.weights[c].resize(L);
    Matrix score(n, L);
    for (std::size_t l = 0; l < L; ++l) {
      Vector wl = bs.weights[c][l];
      for (double& v : wl) v *= rescale;
      for (std::size_t unit = 0; unit < n; ++unit) {
        double acc = 0.0;
        for (std::size_t j = 0; j < wl.size(); ++j)
          acc += wl[j] * (coeffs.coeffs[l](unit, j) - covs.means[l][j]);
        score(unit, l) = acc;
      }
      sol.weights[c][l] = std::move(wl);
    }
    sol.scores.push_back(std::move(score));
  }
  return sol;
}

// Evaluates one variable's weight function u(t) = Σ_b w[variable·B + b]·φ_b(t).
inline double weight_function(const Vector& w_l, const BasisSpec& basis, std::size_t variable,
                              double t) {
  if (!(t >= 0.0 && t <= 1.0))
    fail(ErrorCode::OutOfInterval, "weight function argument t must lie in [0, 1]");
  const std::size_t B = basis.size;
  if (w_l.size() % B != 0 || (variable + 1) * B > w_l.size())
    fail(ErrorCode::InvalidVariableIndex,
         "variable " + std::to_string(variable + 1) + " outside the weight vector");
  const std::vector<double> phi = fourier_basis(B, t);
  double acc = 0.0;
  for (std::size_t b = 0; b < B; ++b) acc += w_l[variable * B + b] * phi[b];
  return acc;
}

}  // namespace mcca
