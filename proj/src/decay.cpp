#include "dispersia/decay.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dispersia/errors.hpp"

namespace dispersia {

const char* to_string(DecayKind kind) {
  switch (kind) {
    case DecayKind::exponential: return "exponential";
    case DecayKind::polynomial: return "polynomial";
    case DecayKind::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2 || x.size() != y.size()) throw std::invalid_argument("line fit needs two or more paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss / syy) : 0.0;
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

DecayReport fit_decay(const EnergyTrace& trace, std::optional<FitWindow> window) {
  if (trace.times.size() != trace.energy.size()) throw UnusableTrace("trace times and energies differ in length");
  if (trace.times.empty()) throw UnusableTrace("trace is empty");
  const double T = trace.times.back();
  const FitWindow w = window ? *window : FitWindow{T / 5.0, T};
  if (!(w.t_end > w.t_start)) throw UnusableTrace("fit window is empty");

  std::vector<double> t, lt, le;
  const double slack = 1e-12 * std::max(1.0, std::abs(w.t_end));
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double ti = trace.times[i], ei = trace.energy[i];
    if (ti < w.t_start - slack || ti > w.t_end + slack) continue;
    if (!(ei > 0.0) || !(ti > 0.0) || !std::isfinite(ei)) continue;
    t.push_back(ti);
    lt.push_back(std::log(ti));
    le.push_back(std::log(ei));
  }
  if (t.empty()) throw UnusableTrace("no positive energies in the fit window");
  if (t.size() < 20) throw UnusableTrace("fewer than 20 usable samples in the fit window");

  DecayReport r;
  r.window = w;
  r.samples = t.size();
  r.exponential_fit = fit_line(t, le);
  r.polynomial_fit = fit_line(lt, le);
  const LineFit& e = r.exponential_fit;
  const LineFit& p = r.polynomial_fit;
  const bool exp_wins = e.r_squared >= p.r_squared;
  const LineFit& best = exp_wins ? e : p;
  r.r_squared = best.r_squared;
  r.residual = best.rms_residual;

  if (best.r_squared < 0.95) {
    r.reason = "neither model reaches r^2 = 0.95";
  } else if (std::abs(e.r_squared - p.r_squared) < 0.01) {
    r.reason = "models are not separated by an r^2 margin of 0.01";
  } else if (!(best.slope < 0.0)) {
    r.reason = "energy does not decay in the window";
  } else if (exp_wins) {
    r.kind = DecayKind::exponential;
    r.rate = -e.slope;
  } else {
    r.kind = DecayKind::polynomial;
    r.slope = p.slope;
  }
  return r;
}

bool DecayPrediction::consistent_with(const DecayReport& report, double slack) const {
  switch (kind) {
    case PredictionKind::exponential: return report.kind == DecayKind::exponential;
    case PredictionKind::polynomial:
      return report.kind == DecayKind::polynomial && report.slope <= max_energy_slope + slack;
    case PredictionKind::none: return true;
  }
  return true;
}

DecayPrediction predict(const PassivityReport& report) {
  DecayPrediction p;
  if (!report.m) return p;
  if (*report.m == 0) {
    p.kind = PredictionKind::exponential;
  } else {
    p.kind = PredictionKind::polynomial;
    p.max_energy_slope = -2.0 / *report.m;
  }
  return p;
}

}  // namespace dispersia
