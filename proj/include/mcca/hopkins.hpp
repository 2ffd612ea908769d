#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mcca/error.hpp"
#include "mcca/matrix.hpp"
#include "mcca/rng.hpp"
#include "mcca/stats.hpp"

namespace mcca {

// Where the uniform comparison points are drawn from. The axis-aligned
// bounding box of the data is the default; an exact convex-hull option
// (rejection sampling against a facet membership test) exists for d ≤ 3;
// an explicit box lets callers supply the true support when it is known.
struct Region {
  enum class Kind { BoundingBox, ConvexHull, ExplicitBox };
  Kind kind = Kind::BoundingBox;
  Vector lo, hi;  // ExplicitBox only

  static Region bounding_box() { return Region{}; }
  static Region convex_hull() { return Region{Kind::ConvexHull, {}, {}}; }
  static Region explicit_box(Vector lo, Vector hi) {
    return Region{Kind::ExplicitBox, std::move(lo), std::move(hi)};
  }

  const char* name() const {
    switch (kind) {
      case Kind::BoundingBox: return "bounding_box";
      case Kind::ConvexHull: return "convex_hull";
      case Kind::ExplicitBox: return "explicit_box";
    }
    return "";
  }
};

namespace detail {

struct Halfspace {
  Vector normal;
  double offset;
};

// All facet-supporting halfspaces of the convex hull, found by brute-force
// enumeration of point subsets of size d. O(n^{d+1}) — fine for the point
// counts this test is meant for (scores of at most a few hundred units).
inline std::vector<Halfspace> hull_halfspaces(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (d > 3)
    fail(ErrorCode::InvalidValue, "convex hull region is supported for d <= 3 only");

  double scale = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double lo = x(0, j), hi = x(0, j);
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, x(i, j));
      hi = std::max(hi, x(i, j));
    }
    scale = std::max(scale, hi - lo);
  }
  const double tol = 1e-9 * std::max(scale, 1e-300);

  std::vector<Halfspace> out;
  auto consider = [&](Vector normal, const double* base) {
    double len = norm2(normal);
    if (len <= tol) return;
    for (double& v : normal) v /= len;
    double b = 0.0;
    for (std::size_t j = 0; j < d; ++j) b += normal[j] * base[j];
    bool all_below = true, all_above = true;
    for (std::size_t i = 0; i < n && (all_below || all_above); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += normal[j] * x(i, j);
      if (s > b + tol) all_below = false;
      if (s < b - tol) all_above = false;
    }
    if (all_below) out.push_back(Halfspace{normal, b + tol});
    if (all_above) {
      for (double& v : normal) v = -v;
      out.push_back(Halfspace{normal, -b + tol});
    }
  };

  if (d == 1) {
    double lo = x(0, 0), hi = x(0, 0);
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, x(i, 0));
      hi = std::max(hi, x(i, 0));
    }
    out.push_back(Halfspace{{1.0}, hi + tol});
    out.push_back(Halfspace{{-1.0}, -lo + tol});
  } else if (d == 2) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double ex = x(j, 0) - x(i, 0);
        const double ey = x(j, 1) - x(i, 1);
        consider({ey, -ex}, x.row(i));
      }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
          const double ax = x(j, 0) - x(i, 0), ay = x(j, 1) - x(i, 1), az = x(j, 2) - x(i, 2);
          const double bx = x(k, 0) - x(i, 0), by = x(k, 1) - x(i, 1), bz = x(k, 2) - x(i, 2);
          consider({ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx}, x.row(i));
        }
  }
  return out;
}

inline bool in_halfspaces(const std::vector<Halfspace>& hs, const Vector& pt) {
  for (const auto& h : hs) {
    double s = 0.0;
    for (std::size_t j = 0; j < pt.size(); ++j) s += h.normal[j] * pt[j];
    if (s > h.offset) return false;
  }
  return true;
}

// Squared distance from pt to the nearest row of x, optionally skipping one.
inline double nearest_sq_dist(const Matrix& x, const Vector& pt,
                              std::size_t skip = SIZE_MAX) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t d = x.cols();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (i == skip) continue;
    const double* row = x.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = row[j] - pt[j];
      s += diff * diff;
    }
    best = std::min(best, s);
  }
  return best;
}

struct RegionRealization {
  Vector lo, width;                 // box to draw from
  std::vector<Halfspace> hull;      // nonempty for the hull region
};

inline RegionRealization realize_region(const Matrix& x, const Region& region) {
  const std::size_t d = x.cols();
  RegionRealization out;
  if (region.kind == Region::Kind::ExplicitBox) {
    if (region.lo.size() != d || region.hi.size() != d)
      fail(ErrorCode::DimensionMismatch, "explicit region dimension differs from the data");
    out.lo = region.lo;
    out.width.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      out.width[j] = region.hi[j] - region.lo[j];
      if (!(out.width[j] > 0.0))
        fail(ErrorCode::DegenerateRegion,
             "explicit region has zero extent in coordinate " + std::to_string(j + 1));
    }
    return out;
  }
  out.lo.resize(d);
  out.width.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    double lo = x(0, j), hi = x(0, j);
    for (std::size_t i = 1; i < x.rows(); ++i) {
      lo = std::min(lo, x(i, j));
      hi = std::max(hi, x(i, j));
    }
    out.lo[j] = lo;
    out.width[j] = hi - lo;
    if (!(out.width[j] > 0.0))
      fail(ErrorCode::DegenerateRegion,
           "all points are identical in coordinate " + std::to_string(j + 1));
  }
  if (region.kind == Region::Kind::ConvexHull) {
    out.hull = hull_halfspaces(x);
    if (out.hull.empty())
      fail(ErrorCode::DegenerateRegion, "point set is affinely degenerate; hull has no volume");
  }
  return out;
}

}  // namespace detail

// One Hopkins replication. Draw order is part of the deterministic contract:
// first the m probe indices (partial Fisher–Yates), then the m uniform
// points, coordinate by coordinate (redrawing whole points rejected by the
// hull test). w_i is the distance from probe i to its nearest *other* data
// point; u_i the distance from uniform point i to the nearest data point.
// Returns Σu_i^e / Σ(u_i^e + w_i^e) with e = d (ambient dimension) or e = 1
// when the classic flag is set.
inline double hopkins_once(const Matrix& x, std::size_t m, CounterRng& rng,
                           const Region& region = Region::bounding_box(),
                           bool classic_d1 = false) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) fail(ErrorCode::InvalidValue, "Hopkins statistic needs at least 2 points");
  if (d < 1) fail(ErrorCode::InvalidValue, "points must have at least one coordinate");
  if (m >= n)
    fail(ErrorCode::TooManyProbes,
         "m = " + std::to_string(m) + " probes require m < n = " + std::to_string(n));
  if (m < 1) fail(ErrorCode::InvalidValue, "at least one probe required");
  if (!x.all_finite()) fail(ErrorCode::NonFinite, "point set contains NaN or Inf");

  const detail::RegionRealization rr = detail::realize_region(x, region);
  const std::vector<std::size_t> probes = rng.sample_without_replacement(n, m);

  const double exponent = classic_d1 ? 1.0 : static_cast<double>(d);
  double sum_w = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    Vector pt(d);
    for (std::size_t j = 0; j < d; ++j) pt[j] = x(probes[i], j);
    const double dist = std::sqrt(detail::nearest_sq_dist(x, pt, probes[i]));
    sum_w += std::pow(dist, exponent);
  }

  double sum_u = 0.0;
  const std::size_t max_attempts = 100000 * m;
  std::size_t attempts = 0;
  for (std::size_t i = 0; i < m; ++i) {
    Vector pt(d);
    while (true) {
      if (++attempts > max_attempts)
        fail(ErrorCode::DegenerateRegion, "hull rejection sampling failed to accept points");
      for (std::size_t j = 0; j < d; ++j) pt[j] = rr.lo[j] + rng.uniform() * rr.width[j];
      if (rr.hull.empty() || detail::in_halfspaces(rr.hull, pt)) break;
    }
    const double dist = std::sqrt(detail::nearest_sq_dist(x, pt));
    sum_u += std::pow(dist, exponent);
  }

  const double denom = sum_u + sum_w;
  if (!(denom > 0.0))
    fail(ErrorCode::DegenerateDistances, "all nearest-neighbor distances are zero");
  return sum_u / denom;
}

// Two-sided tail probability of H under the Beta(m, m) null.
inline double hopkins_pvalue(double h, std::size_t m) {
  if (m < 1) fail(ErrorCode::InvalidValue, "m must be at least 1");
  if (!(h >= 0.0 && h <= 1.0))
    fail(ErrorCode::OutOfRange, "Hopkins statistic must lie in [0, 1]");
  const double f = beta_cdf(h, static_cast<double>(m), static_cast<double>(m));
  return 2.0 * std::min(f, 1.0 - f);
}

struct HopkinsResult {
  double H = 0.0;                 // mean of H_values
  std::size_t m = 0;
  std::size_t d = 0;              // exponent applied to the distances
  std::size_t reps = 0;
  std::vector<double> H_values;
  double p_value = 1.0;
  std::string region;
  std::uint64_t seed = 0;
};

// Averages `reps` replications. Replication r draws from stream r of the
// seed, so the values are independent, reproducible, and order-insensitive.
inline HopkinsResult hopkins(const Matrix& x, std::size_t m, std::size_t reps,
                             std::uint64_t seed, const Region& region = Region::bounding_box(),
                             bool classic_d1 = false) {
  if (reps < 1) fail(ErrorCode::InvalidValue, "at least one replication required");
  HopkinsResult out;
  out.m = m;
  out.d = classic_d1 ? 1 : x.cols();
  out.reps = reps;
  out.region = region.name();
  out.seed = seed;
  out.H_values.reserve(reps);
  double sum = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    CounterRng rng(seed, r);
    const double h = hopkins_once(x, m, rng, region, classic_d1);
    out.H_values.push_back(h);
    sum += h;
  }
  out.H = sum / static_cast<double>(reps);
  out.p_value = hopkins_pvalue(out.H, m);
  return out;
}

}  // namespace mcca
