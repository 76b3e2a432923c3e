#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "dispersia/kernel.hpp"

namespace dispersia {

struct MediumSpec {
  double eps = 1.0;
  double mu = 1.0;
  Kernel nuE = ExpPolyKernel{};
  Kernel nuH = ExpPolyKernel{};

  /// Throws std::invalid_argument unless eps > 0 and mu > 0.
  void validate() const;
};

/// One cavity mode closed into a constant-coefficient system U' = A U.
/// Layout: [E, H, electric memory states..., magnetic memory states...].
struct ModeSystem {
  double k = 0.0;
  Eigen::MatrixXd A;
  std::size_t e_slot = 0;
  std::size_t h_slot = 1;
  std::size_t aux_E_begin = 2;
  std::size_t aux_E_count = 0;
  std::size_t aux_H_begin = 2;
  std::size_t aux_H_count = 0;

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(A.rows()); }
};

/// Exact memory closure: every term Re(W(t) e^{zt}) of nu' gets a Jordan chain
/// phi_0' = z phi_0 + E, phi_l' = z phi_l + phi_{l-1}, real for real z and
/// split into real/imaginary parts otherwise. Throws Unsupported for sampled kernels.
ModeSystem build_mode(const MediumSpec& medium, double k);

/// (E, H) = (amplitude, 0) with zero memory.
Eigen::VectorXd initial_state(const ModeSystem& system, double amplitude);

/// exp(A dt) state, by scaling and squaring with Pade approximation.
Eigen::VectorXd step_exact(const ModeSystem& system, const Eigen::VectorXd& state, double dt);

/// Cached exp(A dt) for repeated steps of the same size.
class Propagator {
 public:
  Propagator(const Eigen::MatrixXd& A, double dt);
  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& state) const;
  [[nodiscard]] const Eigen::MatrixXd& matrix() const { return P_; }

 private:
  Eigen::MatrixXd P_;
};

struct Spectrum {
  double abscissa = 0.0;
  std::vector<std::complex<double>> eigenvalues;
};

/// Largest real part of the eigenvalues of A (balanced dense eigensolver).
Spectrum spectral_abscissa(const ModeSystem& system);

/// (eps lambda + nu_E(0) + L nu_E'(lambda)) (mu lambda + nu_H(0) + L nu_H'(lambda)) + k^2
/// with denominators cleared; its degree equals the closed system's dimension.
RealPoly characteristic_polynomial(const MediumSpec& medium, double k);

/// Roots of characteristic_polynomial.
std::vector<std::complex<double>> dispersion_roots(const MediumSpec& medium, double k);

// ---------------------------------------------------------------------------
// Reference integrator on the stored history.

/// Fields of one mode sampled on t_j = j dt, with the summed past histories
/// eta(s) = int_0^{min(s,t)} field(t - y) dy available on demand.
struct HistoryState {
  double t = 0.0;
  double dt = 0.0;
  double s_max = 0.0;
  std::vector<double> E;
  std::vector<double> H;

  [[nodiscard]] double e() const { return E.back(); }
  [[nodiscard]] double h() const { return H.back(); }
  [[nodiscard]] double eta_E(double s) const;
  [[nodiscard]] double eta_H(double s) const;
};

HistoryState make_history(double E0, double H0, double dt, double s_max);

/// Explicit four-stage scheme on eps E' = -nu_E(0) E - int_0^t nu_E'(t-s) E(s) ds + k H
/// (and the magnetic counterpart), with the convolution by trapezoidal
/// quadrature over the stored past. Lag tables of nu' are built once.
/// Works for any kernel type.
class HistoryIntegrator {
 public:
  HistoryIntegrator(const MediumSpec& medium, double k, double dt, double s_max);
  /// Advances one step of size dt; throws HistoryTruncation past s_max.
  void step(HistoryState& state) const;

 private:
  [[nodiscard]] double convolve(const std::vector<double>& field, const std::vector<double>& lag, std::size_t shift) const;

  double eps_, mu_, k_, dt_, s_max_;
  double e0_, h0_;                        // nu(0)
  std::vector<double> lagE_, lagE_half_;  // nu_E'(j dt), nu_E'((j + 1/2) dt)
  std::vector<double> lagH_, lagH_half_;
};

/// One step of the reference integrator (builds the lag tables each call).
HistoryState step_history(const MediumSpec& medium, double k, const HistoryState& state, double dt);

// ---------------------------------------------------------------------------
// Multimode runs.

struct Mode {
  double k = 0.0;
  double amplitude = 0.0;
};

/// Reference cavity of length L: k_n = n pi c0 / L with c0 = 1/sqrt(eps mu),
/// amplitudes n^{-amplitude_power}, n = 1..n_max.
std::vector<Mode> cavity_modes(const MediumSpec& medium, double length, int n_max, double amplitude_power = 1.5);

struct RunOptions {
  double dt = 0.01;
  double T = 1.0;
  std::size_t output_stride = 1;
  unsigned threads = 1;
  /// History weight C exp(-delta s); defaults to the kernels' certificates.
  std::optional<DecayBound> weight;
};

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> history_norm;
};

/// Integrates every mode with exact steps from (amplitude, 0) and zero memory.
/// energy = 1/2 sum (eps E^2 + mu H^2); history_norm = 1/2 sum int w(s) (eta_E^2 + eta_H^2) ds.
/// Per-mode work may run on several threads; sums are pairwise in fixed mode order.
EnergyTrace run_multimode(const MediumSpec& medium, const std::vector<Mode>& modes, const RunOptions& options);

/// Weight used by run_multimode when none is given: smallest delta and largest C
/// over the kernels' certificates (1, 1 for zero kernels).
DecayBound default_history_weight(const MediumSpec& medium);

/// Pairwise (cascade) sum, fixed association order.
double pairwise_sum(const double* values, std::size_t n);

}  // namespace dispersia
