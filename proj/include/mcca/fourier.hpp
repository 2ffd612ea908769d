#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mcca/error.hpp"
#include "mcca/matrix.hpp"

namespace mcca {

// Orthonormal Fourier system on [0,1]: the constant function followed by
// sine/cosine pairs, which is why the size must be odd. Curves are always
// registered to [0,1] on the equispaced grid t_j = (j−1)/(T−1); a single
// time point sits at t = 0.5.
struct BasisSpec {
  std::size_t size = 9;

  explicit BasisSpec(std::size_t b) : size(b) {
    if (b < 1 || b % 2 == 0)
      fail(ErrorCode::EvenBasisSize, "basis size must be odd and >= 1, got " + std::to_string(b));
  }

  static std::vector<double> grid(std::size_t T) {
    std::vector<double> t(T);
    if (T == 1) {
      t[0] = 0.5;
    } else {
      for (std::size_t j = 0; j < T; ++j)
        t[j] = static_cast<double>(j) / static_cast<double>(T - 1);
    }
    return t;
  }
};

constexpr double kTwoPi = 6.283185307179586476925286766559;

// φ_1(t) = 1; φ_{2m}(t) = √2·sin(2πmt); φ_{2m+1}(t) = √2·cos(2πmt).
inline std::vector<double> fourier_basis(std::size_t basis_size, double t) {
  if (basis_size < 1 || basis_size % 2 == 0)
    fail(ErrorCode::EvenBasisSize,
         "basis size must be odd and >= 1, got " + std::to_string(basis_size));
  if (!(t >= 0.0 && t <= 1.0))
    fail(ErrorCode::OutOfInterval, "basis argument t must lie in [0, 1]");
  std::vector<double> phi(basis_size);
  phi[0] = 1.0;
  const double sqrt2 = std::sqrt(2.0);
  for (std::size_t m = 1; 2 * m + 1 <= basis_size; ++m) {
    const double arg = kTwoPi * static_cast<double>(m) * t;
    phi[2 * m - 1] = sqrt2 * std::sin(arg);
    phi[2 * m] = sqrt2 * std::cos(arg);
  }
  return phi;
}

// T×B matrix of basis values on the standard grid.
inline Matrix basis_design_matrix(std::size_t basis_size, std::size_t T) {
  const std::vector<double> t = BasisSpec::grid(T);
  Matrix psi(T, basis_size);
  for (std::size_t j = 0; j < T; ++j) {
    const std::vector<double> phi = fourier_basis(basis_size, t[j]);
    for (std::size_t b = 0; b < basis_size; ++b) psi(j, b) = phi[b];
  }
  return psi;
}

}  // namespace mcca
