#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mcca/config.hpp"
#include "mcca/error.hpp"
#include "mcca/kernels.hpp"
#include "mcca/linalg.hpp"
#include "mcca/matrix.hpp"

namespace mcca {

struct SolverDiagnostics {
  std::size_t deflated_rank = 0;
  std::vector<std::size_t> block_ranks;      // retained rank per feature
  std::vector<bool> degenerate;              // per component: near-tied eigenvalue
  std::vector<std::string> warnings;
};

// Result of either MCCA variant. correlations[c] is the c-th generalized
// canonical correlation (descending; can exceed 1 when L > 2, bounded by
// L−1). weights[c][l] is the weight vector of feature l — length n for the
// kernel method (coefficients over centered Gram columns), length p_l·B for
// the functional method (basis coefficients). scores[c] is n×L: column l is
// the transformed feature l evaluated at every unit.
struct MccaSolution {
  Vector correlations;
  std::vector<std::vector<Vector>> weights;
  std::vector<Matrix> scores;
  double epsilon_used = 0.0;
  Method method = Method::Kernel;
  SolverDiagnostics diagnostics;
};

// M has zero diagonal blocks and G̃_i·G̃_j/n off the diagonal; B is block
// diagonal with G̃_i²/n + ε·G̃_i. Eigenvectors of the pencil maximize the sum
// of pairwise score covariances under the summed variance constraint.
inline std::pair<Matrix, Matrix> assemble_kernel_problem(const GramSet& grams, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidValue, "epsilon must be positive");
  const std::size_t L = grams.L();
  const std::size_t n = grams.n();
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix m(L * n, L * n);
  Matrix b(L * n, L * n);
  for (std::size_t i = 0; i < L; ++i) {
    if (!grams.centered[i].all_finite())
      fail(ErrorCode::NonFinite, "centered Gram matrix contains NaN or Inf");
    Matrix bii = grams.centered[i] * grams.centered[i];
    bii.scale(inv_n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) bii(r, c) += epsilon * grams.centered[i](r, c);
    symmetrize(bii);
    b.set_block(i * n, i * n, bii);
    for (std::size_t j = i + 1; j < L; ++j) {
      Matrix mij = grams.centered[i] * grams.centered[j];
      mij.scale(inv_n);
      m.set_block(i * n, j * n, mij);
      m.set_block(j * n, i * n, mij.transposed());
    }
  }
  return {std::move(m), std::move(b)};
}

// How solve_kernel_mcca factors the problem. Gram works for every kernel and
// follows the n-dimensional dual formulation directly. Primal is available
// for the linear kernel only: it solves the equivalent covariance-space
// pencil (dimension Σ T·p_l instead of L·n) and maps the solution back to
// Gram-space weights, which makes large-n runs tractable. Automatic picks
// primal exactly when every kernel is linear.
enum class KernelRoute { Automatic, Gram, Primal };

namespace detail {

struct ScaledComponents {
  Vector correlations;
  std::vector<std::vector<Vector>> weights;
  std::vector<Matrix> scores;
};

// Flattens block (l, k) row-major and centers each column across units.
inline Matrix centered_feature_matrix(const RepeatedMeasuresDataset& ds, std::size_t l) {
  const std::size_t dim = ds.T * ds.p[l];
  Matrix x(ds.n, dim);
  for (std::size_t k = 0; k < ds.n; ++k) {
    const double* src = ds.blocks[l][k].data();
    double* dst = x.row(k);
    for (std::size_t i = 0; i < dim; ++i) dst[i] = src[i];
  }
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (std::size_t k = 0; k < ds.n; ++k) mean += x(k, j);
    mean /= static_cast<double>(ds.n);
    for (std::size_t k = 0; k < ds.n; ++k) x(k, j) -= mean;
  }
  return x;
}

}  // namespace detail

inline MccaSolution solve_kernel_mcca(const RepeatedMeasuresDataset& ds,
                                      const std::vector<KernelSpec>& specs, double epsilon,
                                      std::size_t k,
                                      KernelRoute route = KernelRoute::Automatic) {
  if (k < 1) fail(ErrorCode::InvalidValue, "at least one component must be requested");
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidValue, "epsilon must be positive");
  validate_dataset(ds);
  if (specs.size() != ds.L)
    fail(ErrorCode::DimensionMismatch, "one kernel spec per feature required");

  bool all_linear = true;
  for (const auto& s : specs) all_linear = all_linear && s.kind == KernelKind::Linear;
  if (route == KernelRoute::Primal && !all_linear)
    fail(ErrorCode::InvalidValue, "primal route requires linear kernels on every feature");
  const bool primal = route == KernelRoute::Primal ||
                      (route == KernelRoute::Automatic && all_linear);

  const std::size_t L = ds.L;
  const std::size_t n = ds.n;
  const double nd = static_cast<double>(n);

  MccaSolution sol;
  sol.method = Method::Kernel;
  sol.epsilon_used = epsilon;

  if (!primal) {
    GramSet grams = gram_set(ds, specs);
    std::vector<BlockSpectral> b_blocks(L);
    for (std::size_t l = 0; l < L; ++l) {
      // B_l = G̃(G̃/n + εI) shares eigenvectors with G̃, so one decomposition
      // per feature covers both the whitening and the rank diagnostics.
      const SymEigen ge = sym_eig(grams.centered[l]);
      std::size_t gram_rank = 0;
      for (double lam : ge.eigenvalues)
        if (lam > 1e-10 * std::max(ge.eigenvalues.front(), 0.0)) ++gram_rank;
      if (gram_rank + 1 < n)
        sol.diagnostics.warnings.push_back(
            "feature " + ds.feature_names[l] + ": centered Gram rank " +
            std::to_string(gram_rank) + " < n-1 (duplicate or dependent blocks)");
      Vector d(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double lam = std::max(ge.eigenvalues[i], 0.0);
        d[i] = lam * lam / nd + epsilon * lam;
      }
      b_blocks[l] = BlockSpectral{ge.eigenvectors, std::move(d)};
    }
    auto m_block = [&](std::size_t i, std::size_t j) {
      Matrix mij = grams.centered[i] * grams.centered[j];
      mij.scale(1.0 / nd);
      return mij;
    };
    BlockSolution bs = solve_block_generalized(b_blocks, m_block, 1e-10, k);
    if (bs.eigenvalues.size() < k)
      fail(ErrorCode::InsufficientRank,
           "only " + std::to_string(bs.eigenvalues.size()) + " components available, " +
               std::to_string(k) + " requested");

    sol.correlations = bs.eigenvalues;
    sol.diagnostics.deflated_rank = bs.deflated_rank;
    sol.diagnostics.block_ranks = bs.block_ranks;
    sol.diagnostics.degenerate = bs.degenerate;
    const double rescale = std::sqrt(static_cast<double>(L));  // whitened vectors have Σ wᵀBw = 1
    sol.weights.resize(bs.eigenvalues.size());
    sol.scores.reserve(bs.eigenvalues.size());
    for (std::size_t c = 0; c < bs.eigenvalues.size(); ++c) {
      sol.weights[c].resize(L);
      Matrix score(n, L);
      for (std::size_t l = 0; l < L; ++l) {
        Vector wl = bs.weights[c][l];
        for (double& x : wl) x *= rescale;
        const Vector ul = grams.centered[l] * wl;
        for (std::size_t i = 0; i < n; ++i) score(i, l) = ul[i];
        sol.weights[c][l] = std::move(wl);
      }
      sol.scores.push_back(std::move(score));
    }
    return sol;
  }

  // Primal route. With X̃_l the centered flattened feature matrix, the Gram
  // pencil restricted to its range is congruent to the covariance pencil
  //   Σ_{j≠i} Ĉ_ij·v_j = ρ·(Ĉ_ii + εI)·v_i,   Ĉ_ij = X̃_iᵀX̃_j / n,
  // with identical eigenvalues. A primal vector v maps back to a Gram-space
  // weight w = X̃·Ĉ⁺·v, under which scores and constraint terms reduce to
  // O(n·dim) expressions (see below); nothing n×n is ever formed.
  std::vector<Matrix> x(L);
  std::vector<Matrix> cov(L);          // Ĉ_ll
  std::vector<SymEigen> cov_eig(L);
  std::vector<BlockSpectral> b_blocks(L);
  for (std::size_t l = 0; l < L; ++l) {
    x[l] = detail::centered_feature_matrix(ds, l);
    cov[l] = transpose_times(x[l], x[l]);
    cov[l].scale(1.0 / nd);
    symmetrize(cov[l]);
    cov_eig[l] = sym_eig(cov[l]);
    Vector d = cov_eig[l].eigenvalues;
    for (double& v : d) v = std::max(v, 0.0) + epsilon;
    b_blocks[l] = BlockSpectral{cov_eig[l].eigenvectors, std::move(d)};
  }
  auto m_block = [&](std::size_t i, std::size_t j) {
    Matrix cij = transpose_times(x[i], x[j]);
    cij.scale(1.0 / nd);
    return cij;
  };
  BlockSolution bs = solve_block_generalized(b_blocks, m_block, 1e-10, k);
  if (bs.eigenvalues.size() < k)
    fail(ErrorCode::InsufficientRank,
         "only " + std::to_string(bs.eigenvalues.size()) + " components available, " +
             std::to_string(k) + " requested");

  sol.correlations = bs.eigenvalues;
  sol.diagnostics.deflated_rank = bs.deflated_rank;
  sol.diagnostics.block_ranks = bs.block_ranks;
  sol.diagnostics.degenerate = bs.degenerate;
  sol.weights.resize(bs.eigenvalues.size());
  sol.scores.reserve(bs.eigenvalues.size());

  for (std::size_t c = 0; c < bs.eigenvalues.size(); ++c) {
    sol.weights[c].resize(L);
    Matrix score(n, L);
    // β_l = Ĉ_ll⁺·v_l and r_l = Ĉ_ll·β_l (v projected onto the range of the
    // covariance). Then w_l = X̃_l·β_l, the score is G̃_l·w_l = n·X̃_l·r_l, and
    // the constraint term w_lᵀ(G̃²/n + εG̃)w_l equals n·|X̃_l r_l|² + ε·n²·|r_l|².
    std::vector<Vector> beta(L), r(L);
    double constraint = 0.0;
    std::vector<Vector> xr(L);
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t dim = cov[l].rows();
      const Vector& v = bs.weights[c][l];
      const double lam_max = std::max(cov_eig[l].eigenvalues.empty() ? 0.0
                                                                     : cov_eig[l].eigenvalues.front(),
                                      0.0);
      const double cut = 1e-12 * std::max(lam_max, 1e-300);
      Vector coeff(dim, 0.0);  // eigenbasis coordinates of v
      for (std::size_t t = 0; t < dim; ++t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < dim; ++i) acc += cov_eig[l].eigenvectors(i, t) * v[i];
        coeff[t] = acc;
      }
      Vector bl(dim, 0.0), rl(dim, 0.0);
      for (std::size_t t = 0; t < dim; ++t) {
        const double lam = cov_eig[l].eigenvalues[t];
        if (lam > cut) {
          for (std::size_t i = 0; i < dim; ++i) {
            bl[i] += cov_eig[l].eigenvectors(i, t) * coeff[t] / lam;
            rl[i] += cov_eig[l].eigenvectors(i, t) * coeff[t];
          }
        }
      }
      beta[l] = std::move(bl);
      r[l] = std::move(rl);
      xr[l] = x[l] * r[l];
      constraint += nd * dot(xr[l], xr[l]) + epsilon * nd * nd * dot(r[l], r[l]);
    }
    if (!(constraint > 0.0))
      fail(ErrorCode::InsufficientRank, "component has zero variance under the constraint");
    const double rescale = std::sqrt(static_cast<double>(L) / constraint);
    for (std::size_t l = 0; l < L; ++l) {
      Vector wl = x[l] * beta[l];
      for (double& v : wl) v *= rescale;
      for (std::size_t i = 0; i < n; ++i) score(i, l) = nd * xr[l][i] * rescale;
      sol.weights[c][l] = std::move(wl);
    }
    sol.scores.push_back(std::move(score));
  }
  return sol;
}

// Convenience overload resolving epsilon and kernels from a config.
inline MccaSolution solve_kernel_mcca(const RepeatedMeasuresDataset& ds,
                                      const AnalysisConfig& cfg,
                                      KernelRoute route = KernelRoute::Automatic) {
  std::vector<KernelSpec> specs;
  specs.reserve(ds.L);
  for (std::size_t l = 0; l < ds.L; ++l) {
    if (cfg.gamma_is_median)
      specs.push_back(KernelSpec::gaussian(median_gamma(ds.blocks[l])));
    else
      specs.push_back(KernelSpec::gaussian(cfg.kernel_gamma));
  }
  return solve_kernel_mcca(ds, specs, resolve_epsilon(cfg, ds.n), cfg.n_components, route);
}

// Score matrix of one component: column l is G̃_l·w_l.
inline Matrix kernel_scores(const MccaSolution& solution, const GramSet& grams,
                            std::size_t component) {
  if (component >= solution.correlations.size())
    fail(ErrorCode::InvalidComponentIndex,
         "component " + std::to_string(component + 1) + " of " +
             std::to_string(solution.correlations.size()));
  const std::size_t L = grams.L();
  const std::size_t n = grams.n();
  Matrix score(n, L);
  for (std::size_t l = 0; l < L; ++l) {
    const Vector ul = grams.centered[l] * solution.weights[component][l];
    for (std::size_t i = 0; i < n; ++i) score(i, l) = ul[i];
  }
  return score;
}

}  // namespace mcca
