#include <algorithm>
#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "mcca/kernel_mcca.hpp"
#include "mcca/synthetic.hpp"

using namespace mcca;

namespace {

// Aligns the overall sign of b's column block to a before measuring the
// difference; eigenvectors are only defined up to sign.
double score_diff_sign_free(const Matrix& a, const Matrix& b) {
  double dp = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) dp += a(i, j) * b(i, j);
  const double s = dp < 0.0 ? -1.0 : 1.0;
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - s * b(i, j)));
  return d;
}

double constraint_sum(const RepeatedMeasuresDataset& ds, const std::vector<KernelSpec>& specs,
                      const MccaSolution& sol, std::size_t component) {
  const GramSet grams = gram_set(ds, specs);
  double total = 0.0;
  for (std::size_t l = 0; l < ds.L; ++l) {
    const Matrix& g = grams.centered[l];
    Matrix b = g * g;
    b.scale(1.0 / static_cast<double>(ds.n));
    Matrix ge = g;
    ge.scale(sol.epsilon_used);
    b = b + ge;
    total += dot(sol.weights[component][l], b * sol.weights[component][l]);
  }
  return total;
}

}  // namespace

TEST_CASE("gram and primal routes produce the same solution for linear kernels") {
  SyntheticSpec spec;
  spec.n = 50;
  spec.L = 3;
  spec.T = 4;
  spec.p = 2;
  spec.seed = 101;
  const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  const std::vector<KernelSpec> lin(3, KernelSpec::linear());

  const MccaSolution g = solve_kernel_mcca(ds, lin, 1e-4, 3, KernelRoute::Gram);
  const MccaSolution p = solve_kernel_mcca(ds, lin, 1e-4, 3, KernelRoute::Primal);
  REQUIRE(test::max_abs_diff(g.correlations, p.correlations) < 1e-9);
  for (std::size_t c = 0; c < 3; ++c)
    REQUIRE(score_diff_sign_free(g.scores[c], p.scores[c]) < 1e-8);

  // automatic route selection: all-linear goes primal, mixed goes gram —
  // observable only through agreement with the forced routes
  const MccaSolution a = solve_kernel_mcca(ds, lin, 1e-4, 3);
  REQUIRE(test::max_abs_diff(a.correlations, p.correlations) == 0.0);
}

TEST_CASE("solutions satisfy the summed variance constraint") {
  for (std::uint64_t seed : {5u, 6u}) {
    SyntheticSpec spec;
    spec.n = 30;
    spec.L = 2 + seed % 2;
    spec.seed = seed;
    const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
    const std::vector<KernelSpec> specs(ds.L, KernelSpec::gaussian(0.4));
    const MccaSolution sol = solve_kernel_mcca(ds, specs, 1e-3, 2);
    for (std::size_t c = 0; c < 2; ++c)
      REQUIRE(constraint_sum(ds, specs, sol, c) ==
              Catch::Approx(static_cast<double>(ds.L)).margin(1e-8));
  }
}

TEST_CASE("correlations are descending and bounded by L minus one") {
  SyntheticSpec spec;
  spec.n = 25;
  spec.L = 4;
  spec.seed = 9;
  const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  const std::vector<KernelSpec> specs(4, KernelSpec::gaussian(0.6));
  const MccaSolution sol = solve_kernel_mcca(ds, specs, 1e-4, 5);
  REQUIRE(std::is_sorted(sol.correlations.rbegin(), sol.correlations.rend()));
  for (double rho : sol.correlations) REQUIRE(rho <= 3.0 + 1e-8);
}

TEST_CASE("relabeling units permutes scores and preserves correlations") {
  SyntheticSpec spec;
  spec.n = 20;
  spec.seed = 33;
  const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);

  RepeatedMeasuresDataset shuffled = ds;
  CounterRng rng(1, 0);
  const auto perm = rng.sample_without_replacement(ds.n, ds.n);
  for (std::size_t l = 0; l < ds.L; ++l)
    for (std::size_t k = 0; k < ds.n; ++k) shuffled.blocks[l][k] = ds.blocks[l][perm[k]];
  for (std::size_t k = 0; k < ds.n; ++k) shuffled.unit_labels[k] = ds.unit_labels[perm[k]];

  const std::vector<KernelSpec> specs(2, KernelSpec::gaussian(0.5));
  const MccaSolution a = solve_kernel_mcca(ds, specs, 1e-3, 1);
  const MccaSolution b = solve_kernel_mcca(shuffled, specs, 1e-3, 1);
  REQUIRE(a.correlations[0] == Catch::Approx(b.correlations[0]).margin(1e-9));

  Matrix permuted(ds.n, ds.L);
  for (std::size_t k = 0; k < ds.n; ++k)
    for (std::size_t l = 0; l < ds.L; ++l) permuted(k, l) = a.scores[0](perm[k], l);
  REQUIRE(score_diff_sign_free(permuted, b.scores[0]) < 1e-7);
}

TEST_CASE("stronger regularization shrinks the top correlation") {
  SyntheticSpec spec;
  spec.n = 30;
  spec.seed = 55;
  const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  const std::vector<KernelSpec> specs(2, KernelSpec::gaussian(0.5));
  double prev = 2.0;
  for (double eps : {1e-4, 1e-2, 1e-1}) {
    const double rho = solve_kernel_mcca(ds, specs, eps, 1).correlations[0];
    REQUIRE(rho < prev + 1e-12);
    prev = rho;
  }
}

TEST_CASE("perfectly dependent features saturate the correlation bound") {
  SyntheticSpec spec;
  spec.n = 40;
  spec.T = 3;
  spec.seed = 71;
  RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  ds.blocks[1] = ds.blocks[0];  // X_2 = X_1
  const std::vector<KernelSpec> lin(2, KernelSpec::linear());
  const MccaSolution sol = solve_kernel_mcca(ds, lin, 1e-8, 1, KernelRoute::Gram);
  REQUIRE(sol.correlations[0] == Catch::Approx(1.0).margin(0.05));

  // three identical features drive the top correlation to L−1 = 2
  RepeatedMeasuresDataset tri = ds;
  tri.L = 3;
  tri.p.push_back(tri.p[0]);
  tri.blocks.push_back(ds.blocks[0]);
  tri.feature_names.push_back("f3");
  const std::vector<KernelSpec> lin3(3, KernelSpec::linear());
  const MccaSolution sol3 = solve_kernel_mcca(tri, lin3, 1e-8, 1, KernelRoute::Gram);
  REQUIRE(sol3.correlations[0] >= 1.99);
  REQUIRE(sol3.correlations[0] <= 2.0 + 1e-9);
}

TEST_CASE("two-feature analysis recovers the classical canonical correlation") {
  SyntheticSpec spec;
  spec.n = 80;
  spec.T = 2;
  spec.p = 2;
  spec.noise_sd = 0.8;
  spec.seed = 202;
  const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  const double oracle = classical_cca_oracle(detail::centered_feature_matrix(ds, 0),
                                             detail::centered_feature_matrix(ds, 1));
  const std::vector<KernelSpec> lin(2, KernelSpec::linear());
  for (KernelRoute route : {KernelRoute::Gram, KernelRoute::Primal}) {
    const MccaSolution sol = solve_kernel_mcca(ds, lin, 1e-10, 1, route);
    REQUIRE(sol.correlations[0] == Catch::Approx(oracle).margin(1e-6));
  }
}

TEST_CASE("score helper reproduces stored scores and checks bounds") {
  SyntheticSpec spec;
  spec.n = 15;
  spec.seed = 88;
  const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  const std::vector<KernelSpec> specs(2, KernelSpec::gaussian(0.5));
  const GramSet grams = gram_set(ds, specs);
  const MccaSolution sol = solve_kernel_mcca(ds, specs, 1e-3, 2);
  for (std::size_t c = 0; c < 2; ++c)
    REQUIRE((kernel_scores(sol, grams, c) - sol.scores[c]).max_abs() < 1e-12);
  test::expect_error(ErrorCode::InvalidComponentIndex,
                     [&] { kernel_scores(sol, grams, 2); });
}

TEST_CASE("hand-worked score evaluation on a 2x2 centered Gram") {
  GramSet grams;
  grams.centered = {Matrix{{1, -1}, {-1, 1}}, Matrix{{1, -1}, {-1, 1}}};
  grams.raw = grams.centered;
  grams.kernel_specs = {KernelSpec::linear(), KernelSpec::linear()};

  MccaSolution sol;
  sol.correlations = {1.0};
  Vector w = {1.0, 0.0};
  sol.weights = {{w, Vector{0.0, 0.0}}};

  const Matrix score = kernel_scores(sol, grams, 0);
  REQUIRE(score(0, 0) == Catch::Approx(1.0));   // G̃·(1,0) = (1,−1)
  REQUIRE(score(1, 0) == Catch::Approx(-1.0));
  REQUIRE(score(0, 1) == 0.0);                  // zero weight → zero column
  REQUIRE(score(1, 1) == 0.0);
}

TEST_CASE("duplicate units yield identical score rows and a rank warning") {
  SyntheticSpec spec;
  spec.n = 12;
  spec.seed = 99;
  RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  for (std::size_t l = 0; l < ds.L; ++l) ds.blocks[l][1] = ds.blocks[l][0];

  const std::vector<KernelSpec> specs(2, KernelSpec::gaussian(0.5));
  const MccaSolution sol = solve_kernel_mcca(ds, specs, 1e-3, 1, KernelRoute::Gram);
  for (std::size_t l = 0; l < ds.L; ++l)
    REQUIRE(sol.scores[0](0, l) == Catch::Approx(sol.scores[0](1, l)).margin(1e-9));
  REQUIRE_FALSE(sol.diagnostics.warnings.empty());
  REQUIRE(sol.diagnostics.warnings.front().find("rank") != std::string::npos);
}

TEST_CASE("solver rejects invalid requests") {
  SyntheticSpec spec;
  spec.seed = 4;
  const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  const std::vector<KernelSpec> lin(2, KernelSpec::linear());
  const std::vector<KernelSpec> gau(2, KernelSpec::gaussian(0.5));

  test::expect_error(ErrorCode::InvalidValue, [&] { solve_kernel_mcca(ds, lin, 0.0, 1); });
  test::expect_error(ErrorCode::InvalidValue, [&] { solve_kernel_mcca(ds, lin, 1e-3, 0); });
  test::expect_error(ErrorCode::DimensionMismatch,
                     [&] { solve_kernel_mcca(ds, std::vector<KernelSpec>(3, KernelSpec::linear()), 1e-3, 1); });
  test::expect_error(ErrorCode::InvalidValue,
                     [&] { solve_kernel_mcca(ds, gau, 1e-3, 1, KernelRoute::Primal); });

  // scalar blocks with T=1: the linear pencil has rank 2, so k=3 cannot be met
  SyntheticSpec tiny;
  tiny.n = 10;
  tiny.T = 1;
  tiny.seed = 2;
  const RepeatedMeasuresDataset tds = gen_latent_dataset(tiny);
  test::expect_error(ErrorCode::InsufficientRank,
                     [&] { solve_kernel_mcca(tds, lin, 1e-6, 3, KernelRoute::Primal); });
}
