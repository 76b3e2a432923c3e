#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "dispersia/polynomial.hpp"

namespace dispersia {

/// (p(t) cos(y t) + q(t) sin(y t)) e^{x t} with y >= 0.
struct RealTerm {
  RealPoly cos_part;
  RealPoly sin_part;
  double x = 0.0;
  double y = 0.0;
};

/// P(t) e^{z t} with a complex polynomial P.
struct ComplexTerm {
  ComplexPoly poly;
  std::complex<double> z;
};

/// Claimed bound |nu''(t)| <= C exp(-delta t).
struct DecayBound {
  double C = 1.0;
  double delta = 1.0;
};

/// Result of certify_class_K. `max_violation` is max over the checked grid
/// of |nu''(t)| - C exp(-delta t); it is <= 0 for an issued certificate.
struct ClassKCertificate {
  double C = 1.0;
  double delta = 1.0;
  double checked_horizon = 0.0;
  double max_violation = 0.0;

  [[nodiscard]] DecayBound bound() const { return {C, delta}; }
  /// History weight w(s) = C exp(-delta s).
  [[nodiscard]] double weight(double s) const { return C * std::exp(-delta * s); }
};

/// Susceptibility kernel nu(t) = nu_inf + sum_j (p_j cos(y_j t) + q_j sin(y_j t)) e^{x_j t}.
///
/// Stored in real cos/sin form so evaluation is real by construction.
/// Complex input is folded pairwise: the term list must be conjugate-closed,
/// otherwise construction throws KernelError. A term with z = 0 and a
/// constant polynomial becomes the asymptotic value nu_inf (Drude-type
/// kernels); every other term must eventually decay, which certify_class_K
/// enforces. A default-constructed kernel is the zero kernel.
class ExpPolyKernel {
 public:
  ExpPolyKernel();

  static ExpPolyKernel zero() { return {}; }
  static ExpPolyKernel from_terms(const std::vector<ComplexTerm>& terms);
  static ExpPolyKernel from_real_terms(std::vector<RealTerm> terms, double asymptotic_value = 0.0);

  /// beta e^{-t/tau}
  static ExpPolyKernel debye(double beta, double tau);
  /// beta sin(nu0 t) e^{-nu t/2}
  static ExpPolyKernel lorentz(double beta, double nu0, double nu);
  /// beta (1 - e^{-nu t})
  static ExpPolyKernel drude(double beta, double nu);

  [[nodiscard]] bool is_zero() const { return terms_.empty() && asymptotic_ == 0.0; }
  [[nodiscard]] double asymptotic_value() const { return asymptotic_; }
  [[nodiscard]] const std::vector<RealTerm>& terms() const { return terms_; }

  /// Terms whose real parts sum to nu^{(order)}(t) - [order == 0] nu_inf.
  /// One entry per stored real term, P = p - i q differentiated exactly.
  [[nodiscard]] const std::vector<ComplexTerm>& real_part_terms(int order) const;

  /// Conjugate-closed expansion: nu^{(order)}(t) - [order == 0] nu_inf = sum P_j(t) e^{z_j t}.
  [[nodiscard]] std::vector<ComplexTerm> conjugate_closed_terms(int order = 0) const;

  /// Smallest -Re z over the stored terms; +inf when there are none.
  [[nodiscard]] double min_decay_rate() const;
  /// Largest oscillation frequency y over the stored terms.
  [[nodiscard]] double max_frequency() const;

  /// nu, nu' or nu'' at t >= 0 by term-wise differentiation.
  [[nodiscard]] double eval(double t, int order = 0) const;

  /// Closed-form Laplace transform sum_j sum_l P_j^{(l)}(0) / (lambda - z_j)^{l+1} (+ nu_inf / lambda).
  [[nodiscard]] std::complex<double> laplace(std::complex<double> lambda) const;

  /// nu' as a kernel of the same family.
  [[nodiscard]] ExpPolyKernel derivative() const;

 private:
  void build_forms();

  std::vector<RealTerm> terms_;
  double asymptotic_ = 0.0;
  std::array<std::vector<ComplexTerm>, 3> forms_;
};

/// Black-box kernel t -> (nu, nu', nu'') with a user-declared decay bound.
class SampledKernel {
 public:
  using Evaluator = std::function<std::array<double, 3>(double)>;
  /// Optional closed form of omega -> i omega L nu(i omega), used for dense frequency scans.
  using OmegaResponse = std::function<std::complex<double>(double)>;

  SampledKernel(std::string name, Evaluator evaluator, DecayBound bound, double panel_width = 0.5,
                OmegaResponse response = {});

  /// Registry: "gaussian" (e^{-t^2}) and "exponential" (e^{-t}).
  static SampledKernel builtin(const std::string& name, DecayBound bound);
  static std::vector<std::string> builtin_names();
  /// Quadrature view of a closed-form kernel, used to cross-check the two routes.
  static SampledKernel wrap(const ExpPolyKernel& kernel, DecayBound bound);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const DecayBound& bound() const { return bound_; }
  [[nodiscard]] double panel_width() const { return panel_width_; }
  [[nodiscard]] double eval(double t, int order = 0) const;
  [[nodiscard]] std::array<double, 3> eval_all(double t) const;
  [[nodiscard]] bool has_fast_response() const { return static_cast<bool>(response_); }
  [[nodiscard]] std::complex<double> fast_response(double omega) const;

 private:
  std::string name_;
  Evaluator evaluator_;
  DecayBound bound_;
  double panel_width_;
  OmegaResponse response_;
};

using Kernel = std::variant<ExpPolyKernel, SampledKernel>;

/// nu^{(order)}(t); throws std::domain_error for t < 0 or order outside 0..2.
double eval(const Kernel& kernel, double t, int order = 0);

/// delta = 0.9 min|Re z_j|, C = 1.05 max(|nu''| e^{delta t}) over 10^4 log-spaced
/// points on [0, 20/delta] plus an analytic tail bound. Also checks that nu'
/// vanishes at the horizon and that nu'(t) = -int_t^inf nu'' at t = 0, 1, 10.
ClassKCertificate certify_class_K(const ExpPolyKernel& kernel);
/// Validates the user-declared bound on a logarithmic grid over [0, 50/delta].
ClassKCertificate certify_class_K(const SampledKernel& kernel);
ClassKCertificate certify_class_K(const Kernel& kernel);

/// Laplace transform for Re lambda >= 0. Closed form for ExpPolyKernel,
/// quadrature (laplace_quadrature) for SampledKernel.
std::complex<double> laplace(const Kernel& kernel, std::complex<double> lambda);

/// Quadrature route: the direct definition when Re lambda > delta/2, otherwise
/// lambda L nu = nu(0) + (nu'(0) + L nu''(lambda)) / lambda, which converges
/// absolutely on the imaginary axis. Throws UnsupportedPoint at lambda = 0.
std::complex<double> laplace_quadrature(const SampledKernel& kernel, std::complex<double> lambda);

/// i omega L nu(i omega); omega = 0 is handled as the limit nu(0) + L nu'(0).
std::complex<double> omega_response(const Kernel& kernel, double omega);

/// int_t^inf nu''(y) dy by quadrature, truncated where the decay bound makes the tail < 1e-14.
double tail_integral_second_derivative(const Kernel& kernel, double t, const DecayBound& bound);

/// int_0^inf e^{-lambda t} nu^{(order)}(t) dt by quadrature, for Re lambda >= 0 and order >= 1
/// (those converge on the whole closed half-plane for class-K kernels).
std::complex<double> laplace_of_derivative_quadrature(const Kernel& kernel, int order, std::complex<double> lambda,
                                                      const DecayBound& bound, double abs_tol = 1e-13);

}  // namespace dispersia
