// Acceptance gate: one line per criterion, nonzero exit if any required
// criterion fails. Criterion 9 needs external datasets and is skipped when
// they are absent.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "mcca/functional_mcca.hpp"
#include "mcca/hopkins.hpp"
#include "mcca/kernel_mcca.hpp"
#include "mcca/report.hpp"
#include "mcca/stats.hpp"
#include "mcca/synthetic.hpp"

using namespace mcca;

namespace {

int g_failures = 0;

class Criterion {
 public:
  explicit Criterion(int index) : index_(index), start_(std::chrono::steady_clock::now()) {}

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void finish(bool ok, const std::string& detail, double budget_seconds = 0.0) {
    const double t = elapsed();
    if (budget_seconds > 0.0 && t >= budget_seconds) ok = false;
    if (!ok) ++g_failures;
    std::printf("criterion %d: %s  (%.1fs)  %s\n", index_, ok ? "PASS" : "FAIL", t,
                detail.c_str());
    std::fflush(stdout);
  }

  void skip(const std::string& reason) {
    std::printf("criterion %d: SKIP  %s\n", index_, reason.c_str());
    std::fflush(stdout);
  }

 private:
  int index_;
  std::chrono::steady_clock::time_point start_;
};

SyntheticSpec latent_spec(std::size_t n, std::size_t L, std::size_t T, std::size_t p,
                          std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.L = L;
  spec.T = T;
  spec.p = p;
  spec.seed = seed;
  return spec;
}

// criterion 1: top multiset correlation under the linear kernel equals the
// classical two-set canonical correlation computed by an independent solver
void criterion_1() {
  Criterion c(1);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RepeatedMeasuresDataset ds = gen_latent_dataset(latent_spec(200, 2, 3, 1, seed));
    const std::vector<KernelSpec> lin(2, KernelSpec::linear());
    const MccaSolution sol = solve_kernel_mcca(ds, lin, 1e-10, 1);
    const double rho_oracle = classical_cca_oracle(detail::centered_feature_matrix(ds, 0),
                                                   detail::centered_feature_matrix(ds, 1));
    worst = std::max(worst, std::abs(sol.correlations[0] - rho_oracle));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |rho - rho_classical| = %.3e (limit 1e-4)", worst);
  c.finish(worst < 1e-4, buf, 10.0);
}

// criterion 2: the functional solution equals a linear-kernel analysis of the
// smoothed coefficient vectors once the n vs n-1 denominators are matched
void criterion_2() {
  Criterion c(2);
  const BasisSpec basis(5);
  double worst = 0.0;
  for (std::uint64_t seed = 11; seed <= 15; ++seed) {
    const RepeatedMeasuresDataset ds = gen_latent_dataset(latent_spec(50, 3, 16, 1, seed));
    const double eps = 1e-3;
    const MccaSolution fsol = solve_functional_mcca(ds, basis, eps, 3);

    const CoefficientSet coeffs = smooth_dataset(ds, basis);
    RepeatedMeasuresDataset cds;
    cds.n = ds.n;
    cds.L = ds.L;
    cds.T = basis.size;
    cds.p.assign(ds.L, 1);
    cds.blocks.assign(ds.L, std::vector<Matrix>(ds.n, Matrix(basis.size, 1)));
    for (std::size_t l = 0; l < ds.L; ++l)
      for (std::size_t k = 0; k < ds.n; ++k)
        for (std::size_t b = 0; b < basis.size; ++b)
          cds.blocks[l][k](b, 0) = coeffs.coeffs[l](k, b);
    cds.unit_labels = ds.unit_labels;
    cds.feature_names = ds.feature_names;

    const double n = static_cast<double>(ds.n);
    const std::vector<KernelSpec> lin(ds.L, KernelSpec::linear());
    const MccaSolution ksol =
        solve_kernel_mcca(cds, lin, eps * (n - 1.0) / n, 3, KernelRoute::Gram);
    for (std::size_t i = 0; i < fsol.correlations.size(); ++i)
      worst = std::max(worst, std::abs(fsol.correlations[i] - ksol.correlations[i]));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max correlation gap = %.3e (limit 1e-8)", worst);
  c.finish(worst < 1e-8, buf, 10.0);
}

// criterion 3: three identical features drive the top generalized correlation
// to its L-1 = 2 ceiling, above the classical bound of one
void criterion_3() {
  Criterion c(3);
  const RepeatedMeasuresDataset base = gen_latent_dataset(latent_spec(60, 2, 2, 1, 21));
  RepeatedMeasuresDataset ds;
  ds.n = base.n;
  ds.L = 3;
  ds.T = base.T;
  ds.p.assign(3, 1);
  ds.blocks.assign(3, base.blocks[0]);
  ds.unit_labels = base.unit_labels;
  ds.feature_names = {"f1", "f2", "f3"};
  const std::vector<KernelSpec> lin(3, KernelSpec::linear());
  const MccaSolution sol = solve_kernel_mcca(ds, lin, 1e-8, 1);
  const double top = sol.correlations[0];
  char buf[96];
  std::snprintf(buf, sizeof buf, "top correlation = %.9f (required in [1.99, 2])", top);
  c.finish(top >= 1.99 && top <= 2.0, buf, 5.0);
}

// criterion 4: every component of every solution meets the summed variance
// constraint, re-evaluated here from freshly computed centered Gram matrices
void criterion_4() {
  Criterion c(4);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t L = 2 + static_cast<std::size_t>(i % 3);
    const SyntheticSpec spec = latent_spec(20 + 10 * static_cast<std::size_t>(i % 4), L,
                                           1 + static_cast<std::size_t>(i % 3),
                                           1 + static_cast<std::size_t>(i % 2),
                                           100 + static_cast<std::uint64_t>(i));
    const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
    const KernelSpec kern = (i % 2 == 0) ? KernelSpec::linear()
                                         : KernelSpec::gaussian(0.3 + 0.1 * (i % 3));
    const std::vector<KernelSpec> specs(L, kern);
    const double eps = std::pow(10.0, -2.0 - (i % 3));
    const MccaSolution sol = solve_kernel_mcca(ds, specs, eps, 2);

    const GramSet grams = gram_set(ds, specs);
    const double n = static_cast<double>(ds.n);
    for (std::size_t comp = 0; comp < sol.correlations.size(); ++comp) {
      double sum = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        const Vector& w = sol.weights[comp][l];
        const Vector gw = grams.centered[l] * w;
        double quad = 0.0, lin_term = 0.0;
        for (std::size_t r = 0; r < gw.size(); ++r) {
          quad += gw[r] * gw[r];
          lin_term += w[r] * gw[r];
        }
        sum += quad / n + eps * lin_term;
      }
      worst = std::max(worst, std::abs(sum - static_cast<double>(L)));
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |constraint - L| = %.3e (limit 1e-8)", worst);
  c.finish(worst < 1e-8, buf, 10.0);
}

// criterion 5: null calibration of the Hopkins statistic. Each meta-trial
// draws 500 fresh uniform samples on the unit square and compares the 500
// H values against Beta(10, 10). Judged with probes drawn from the known
// support [0,1]²; the count under the default estimated bounding box is
// reported alongside, since the shrunken window biases H further.
void criterion_5() {
  Criterion c(5);
  const std::size_t n = 100, m = 10, reps = 500, meta_trials = 100;
  const double crit = ks_critical_value(reps, 0.01);

  struct Calibration {
    double mean = 0.0;
    std::size_t ks_passes = 0;
  };
  const auto calibrate = [&](const Region& region, std::uint64_t probe_base) {
    Calibration out;
    double grand_sum = 0.0;
    for (std::size_t meta = 0; meta < meta_trials; ++meta) {
      std::vector<double> h_values(reps);
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const std::uint64_t draw = meta * reps + rep;
        CounterRng data_rng(777, draw);
        Matrix x(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
          x(i, 0) = data_rng.uniform();
          x(i, 1) = data_rng.uniform();
        }
        h_values[rep] = hopkins(x, m, 1, probe_base + draw, region).H_values[0];
        grand_sum += h_values[rep];
      }
      const double ks =
          ks_statistic(h_values, [](double v) { return beta_cdf(v, 10.0, 10.0); });
      if (ks < crit) ++out.ks_passes;
    }
    out.mean = grand_sum / static_cast<double>(meta_trials * reps);
    return out;
  };

  const Calibration known = calibrate(Region::explicit_box({0.0, 0.0}, {1.0, 1.0}), 1000000);
  const Calibration bbox = calibrate(Region::bounding_box(), 3000000);
  const bool mean_ok = known.mean >= 0.45 && known.mean <= 0.55;
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "mean H = %.4f (required [0.45, 0.55]); KS < %.4f in %zu/100 (required >= 95; "
                "%zu/100 under the estimated bounding box)",
                known.mean, crit, known.ks_passes, bbox.ks_passes);
  c.finish(mean_ok && known.ks_passes >= 95, buf, 60.0);
}

// criterion 6: two well-separated Gaussian clusters push H well above 0.5
void criterion_6() {
  Criterion c(6);
  const std::size_t n = 100, reps = 200;
  double sum = 0.0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    CounterRng rng(888, rep);
    Matrix x(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double shift = i < n / 2 ? 0.0 : 10.0;
      x(i, 0) = rng.normal() + shift;
      x(i, 1) = rng.normal();
    }
    sum += hopkins(x, 10, 1, 2000000 + rep).H_values[0];
  }
  const double mean = sum / static_cast<double>(reps);
  char buf[96];
  std::snprintf(buf, sizeof buf, "mean H = %.4f over %zu replications (required > 0.75)", mean,
                reps);
  c.finish(mean > 0.75, buf, 10.0);
}

// criterion 7: the median error against a 20x-larger reference run shrinks
// strictly as the sample size quadruples
void criterion_7() {
  Criterion c(7);
  SyntheticSpec spec;
  spec.seed = 0;
  const ConvergenceReport r = convergence_study(spec, {100, 400, 1600}, 20, Method::Kernel);
  const bool ok = r.medians[0] > r.medians[1] && r.medians[1] > r.medians[2];
  char buf[128];
  std::snprintf(buf, sizeof buf, "medians = %.3e > %.3e > %.3e required", r.medians[0],
                r.medians[1], r.medians[2]);
  c.finish(ok, buf, 120.0);
}

// criterion 8: curves generated inside the basis span are reproduced exactly,
// and the basis is orthonormal under fine midpoint quadrature
void criterion_8() {
  Criterion c(8);
  const BasisSpec basis(5);
  const std::size_t T = 64;
  const Matrix psi = basis_design_matrix(basis.size, T);
  double recovery = 0.0;
  CounterRng rng(99, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t p = 1 + static_cast<std::size_t>(trial % 2);
    Matrix coeff(basis.size, p);
    for (std::size_t b = 0; b < basis.size; ++b)
      for (std::size_t v = 0; v < p; ++v) coeff(b, v) = rng.normal();
    const Matrix samples = psi * coeff;
    const Vector fitted = smooth_block(samples, basis);
    for (std::size_t v = 0; v < p; ++v)
      for (std::size_t t = 0; t < T; ++t) {
        double acc = 0.0;
        for (std::size_t b = 0; b < basis.size; ++b)
          acc += psi(t, b) * fitted[v * basis.size + b];
        recovery = std::max(recovery, std::abs(acc - samples(t, v)));
      }
  }

  // midpoint rule on a full period is exact for these trigonometric products
  const std::size_t quad = 4096;
  Matrix gram(basis.size, basis.size);
  for (std::size_t k = 0; k < quad; ++k) {
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(quad);
    const std::vector<double> phi = fourier_basis(basis.size, t);
    for (std::size_t i = 0; i < basis.size; ++i)
      for (std::size_t j = 0; j < basis.size; ++j)
        gram(i, j) += phi[i] * phi[j] / static_cast<double>(quad);
  }
  double ortho = 0.0;
  for (std::size_t i = 0; i < basis.size; ++i)
    for (std::size_t j = 0; j < basis.size; ++j)
      ortho = std::max(ortho, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));

  char buf[112];
  std::snprintf(buf, sizeof buf, "grid recovery = %.3e (limit 1e-8); |Gram - I| = %.3e (limit 1e-6)",
                recovery, ortho);
  c.finish(recovery < 1e-8 && ortho < 1e-6, buf);
}

// criterion 9 (optional): real-data correlations. Runs only when the two
// ingested datasets are supplied; otherwise reports SKIP.
void criterion_9() {
  Criterion c(9);
  const char* env = std::getenv("MCCA_DATA_DIR");
  const std::string dir = env ? env : "data";
  const std::string gci_path = dir + "/gci.csv";
  const std::string agri_path = dir + "/agriculture.csv";
  if (!std::filesystem::exists(gci_path) || !std::filesystem::exists(agri_path)) {
    c.skip("external datasets not present (" + gci_path + ", " + agri_path + ")");
    return;
  }
  bool ok = true;
  std::string detail;
  {
    const RepeatedMeasuresDataset gci = parse_dataset(read_text_file(gci_path));
    AnalysisConfig cfg;
    const MccaSolution ksol = solve_kernel_mcca(gci, cfg);
    const double kernel_expect[3] = {0.74, 0.28, 0.11};
    for (int i = 0; i < 3; ++i)
      ok = ok && std::abs(ksol.correlations[i] - kernel_expect[i]) <= 0.03;
    const MccaSolution fsol =
        solve_functional_mcca(gci, BasisSpec(5), resolve_epsilon(cfg, gci.n), 3);
    const double functional_expect[3] = {0.76, 0.29, 0.11};
    for (int i = 0; i < 3; ++i)
      ok = ok && std::abs(fsol.correlations[i] - functional_expect[i]) <= 0.03;
    detail += "gci kernel top = " + std::to_string(ksol.correlations[0]) +
              ", functional top = " + std::to_string(fsol.correlations[0]);
  }
  {
    const RepeatedMeasuresDataset agri = parse_dataset(read_text_file(agri_path));
    AnalysisConfig cfg;
    cfg.n_components = 1;
    const MccaSolution ksol = solve_kernel_mcca(agri, cfg);
    const MccaSolution fsol =
        solve_functional_mcca(agri, BasisSpec(9), resolve_epsilon(cfg, agri.n), 1);
    ok = ok && std::abs(ksol.correlations[0] - 0.45) <= 0.03;
    ok = ok && std::abs(fsol.correlations[0] - 0.58) <= 0.03;
    detail += "; agriculture kernel = " + std::to_string(ksol.correlations[0]) +
              ", functional = " + std::to_string(fsol.correlations[0]);
  }
  c.finish(ok, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures > 0) std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
