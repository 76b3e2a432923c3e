#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dispersia/kernel.hpp"
#include "dispersia/polynomial.hpp"

namespace dispersia {

/// omega -> i omega L nu(i omega) written as Pr/Qr + i Pi/Qi with real polynomials.
/// Pr, Qr, Qi are even in omega and Pi is odd.
struct OmegaRational {
  RealPoly Pr, Qr, Pi, Qi;

  [[nodiscard]] std::complex<double> operator()(double omega) const;
  [[nodiscard]] double real_part(double omega) const { return Pr(omega) / Qr(omega); }
};

/// Exact rational form by partial-fraction recombination over the common
/// denominator prod |i omega - z_j|^{2 m_j}. Coefficients that cancel to
/// rounding level (relative 1e-11 of the absolute contributions) are set to
/// zero, and common quadratic factors are divided out.
OmegaRational omega_form(const ExpPolyKernel& kernel);

struct PassivityReport {
  bool passive = false;
  bool strictly_passive = false;
  std::optional<int> m;
  double sigma_E = 0.0;
  double sigma_H = 0.0;
  double omega0 = 0.0;
  /// Frequencies at which a failed condition is violated.
  std::vector<double> witnesses;
  /// True when decided exactly from the rational form; false for dense-grid checks.
  bool exact = true;
  std::string note;
};

/// Grid settings for kernels without a rational form.
struct SampledScan {
  /// Used when the kernel has a closed-form frequency response.
  std::size_t points = 1'000'000;
  double omega_max = 1e4;
  /// Used when every value needs a quadrature.
  std::size_t quadrature_points = 400;
  double quadrature_omega_max = 100.0;
};

/// Re(i omega L nu_E) >= 0 and Re(i omega L nu_H) >= 0 for all real omega.
PassivityReport check_passivity(const Kernel& nuE, const Kernel& nuH, const SampledScan& scan = {});

/// Re(i omega L nu_E) + Re(i omega L nu_H) > 0 for all omega != 0.
PassivityReport check_strict_passivity(const Kernel& nuE, const Kernel& nuH, const SampledScan& scan = {});

/// Smallest m with |omega|^m Re(i omega L nu_f) >= sigma_f for |omega| >= omega0,
/// sigma_E + sigma_H > 0. Throws NoDecayExponent when the medium is not
/// strictly passive or a leading ratio or degree deficit rules m out.
PassivityReport decay_exponent(const Kernel& nuE, const Kernel& nuH, const SampledScan& scan = {});

/// All three checks in sequence; `m` stays empty (with `note` set) when no exponent exists.
PassivityReport analyze(const Kernel& nuE, const Kernel& nuH, const SampledScan& scan = {});

}  // namespace dispersia
