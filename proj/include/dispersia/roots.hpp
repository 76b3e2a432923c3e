#pragma once

#include <complex>
#include <vector>

#include "dispersia/polynomial.hpp"

namespace dispersia {

/// All complex roots of p (with multiplicity), from the eigenvalues of the
/// balanced companion matrix followed by Newton polishing. Exact zero
/// low-order coefficients are split off as exact roots at 0.
std::vector<std::complex<double>> polynomial_roots(const RealPoly& p);

enum class SignDomain {
  whole_line,  ///< all real x
  half_line,   ///< x >= 0 (enough for even polynomials)
};

/// Sign structure of a real polynomial on the real line, decided from its
/// isolated real roots rather than by sampling.
struct SignProfile {
  /// Real roots inside the domain, ascending, duplicates merged. Roots that
  /// touch zero without crossing are included.
  std::vector<double> real_roots;
  /// One test point per open interval between consecutive breakpoints.
  std::vector<double> test_points;
  /// Test points where p < 0.
  std::vector<double> negative_at;
  bool identically_zero = false;

  [[nodiscard]] bool nonnegative() const { return negative_at.empty(); }
  /// p > 0 everywhere in the domain except possibly at x = 0.
  [[nodiscard]] bool positive_off_zero() const;
};

/// Treats a root as real when |Im r| < 1e-10 (1 + |r|), or when it is close to
/// the axis and p(Re r) vanishes to within 1e-10 of the coefficient scale
/// (this catches double roots that the eigensolver splits into a pair).
SignProfile sign_profile(const RealPoly& p, SignDomain domain);

}  // namespace dispersia
