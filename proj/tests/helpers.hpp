#pragma once

#include <functional>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "mcca/error.hpp"
#include "mcca/matrix.hpp"
#include "mcca/rng.hpp"

namespace test {

// Runs `fn`, requires that it throws mcca::Error with the given code, and
// returns the message so callers can assert on its content.
template <typename Fn>
std::string expect_error(mcca::ErrorCode code, Fn&& fn) {
  try {
    fn();
  } catch (const mcca::Error& e) {
    if (e.code() != code)
      FAIL("wrong error code: got \"" << e.what() << "\"");
    return e.what();
  }
  FAIL("expected an error, none thrown");
  return {};
}

inline mcca::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  mcca::CounterRng rng(seed, 0);
  mcca::Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline mcca::Matrix random_symmetric(std::size_t n, std::uint64_t seed) {
  mcca::Matrix m = random_matrix(n, n, seed);
  mcca::symmetrize(m);
  return m;
}

// X^T·X + ridge·I: symmetric positive definite by construction.
inline mcca::Matrix random_spd(std::size_t n, std::uint64_t seed, double ridge = 1e-3) {
  const mcca::Matrix x = random_matrix(n + 2, n, seed);
  mcca::Matrix m = mcca::transpose_times(x, x);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += ridge;
  return m;
}

inline double max_abs_diff(const mcca::Vector& a, const mcca::Vector& b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Distance between vectors identified up to sign: aligns b to a first.
inline double sign_free_diff(const mcca::Vector& a, const mcca::Vector& b) {
  REQUIRE(a.size() == b.size());
  double dp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dp += a[i] * b[i];
  const double s = dp < 0.0 ? -1.0 : 1.0;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - s * b[i]));
  return d;
}

}  // namespace test
