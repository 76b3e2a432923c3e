#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "dispersia/dispersion.hpp"
#include "dispersia/modal.hpp"

namespace dispersia {

enum class DecayKind { exponential, polynomial, inconclusive };

const char* to_string(DecayKind kind);

struct FitWindow {
  double t_start = 0.0;
  double t_end = 0.0;
};

/// Least-squares line through (x, y).
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct DecayReport {
  DecayKind kind = DecayKind::inconclusive;
  /// omega in E ~ exp(-omega t); set for exponential.
  double rate = 0.0;
  /// p in E ~ t^p; set for polynomial.
  double slope = 0.0;
  FitWindow window;
  /// r^2 and rms residual of the winning model (of the better one when inconclusive).
  double r_squared = 0.0;
  double residual = 0.0;
  std::size_t samples = 0;
  LineFit exponential_fit;  // log E against t
  LineFit polynomial_fit;   // log E against log t
  std::string reason;       // why the fit is inconclusive
};

/// Fits log E against t and against log t on the window (default [T/5, T]),
/// dropping samples with E <= 0 (and t <= 0). The better r^2 wins unless both
/// are below 0.95, they differ by less than 0.01, or the winner does not decay.
/// Throws UnusableTrace when fewer than 20 usable samples remain.
DecayReport fit_decay(const EnergyTrace& trace, std::optional<FitWindow> window = std::nullopt);

enum class PredictionKind { exponential, polynomial, none };

struct DecayPrediction {
  PredictionKind kind = PredictionKind::none;
  /// For polynomial: energy slope must be at most this (-2/m).
  double max_energy_slope = 0.0;

  /// Whether an observed report matches; `slack` loosens the slope bound.
  [[nodiscard]] bool consistent_with(const DecayReport& report, double slack = 0.15) const;
};

/// m = 0: exponential; m > 0: energy slope <= -2/m; no m: no prediction.
DecayPrediction predict(const PassivityReport& report);

}  // namespace dispersia
