#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>

namespace dispersia {

namespace detail {

template <class R>
struct GkPiece {
  R value;
  double error;
  double l1;
};

template <class F>
auto gk31(F& f, double a, double b) {
  double error = 0.0, l1 = 0.0;
  auto v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &error, &l1);
  return GkPiece<decltype(v)>{v, error, l1};
}

// Bisection stops at the tolerance, at max depth, or once halving no longer
// shrinks the error estimate (it is then at the rounding floor).
template <class F, class R>
R gk_refine(F& f, double a, double b, const GkPiece<R>& p, double rel_tol, int depth) {
  if (depth == 0 || p.error <= rel_tol * p.l1) return p.value;
  const double m = 0.5 * (a + b);
  const auto l = gk31(f, a, m);
  const auto r = gk31(f, m, b);
  if (l.error + r.error >= 0.5 * p.error) return l.value + r.value;
  return gk_refine(f, a, m, l, rel_tol, depth - 1) + gk_refine(f, m, b, r, rel_tol, depth - 1);
}

}  // namespace detail

/// Integrates f over [a, b] as a sum of panels no wider than `h`, each by
/// adaptive 31-point Gauss-Kronrod. Panel splitting keeps oscillatory
/// integrands resolved; `rel_tol` is relative to each panel's L1 norm.
template <class F>
auto integrate_panels(F&& f, double a, double b, double h, double rel_tol = 1e-13) {
  using R = decltype(f(a));
  R total{};
  if (!(b > a)) return total;
  const long panels = std::max(1L, static_cast<long>(std::ceil((b - a) / h)));
  const double width = (b - a) / static_cast<double>(panels);
  for (long i = 0; i < panels; ++i) {
    const double lo = a + static_cast<double>(i) * width;
    const double hi = (i + 1 == panels) ? b : lo + width;
    total += detail::gk_refine(f, lo, hi, detail::gk31(f, lo, hi), rel_tol, 12);
  }
  return total;
}

/// Smallest T >= a with bound * exp(-rate T) / rate <= tol.
inline double tail_horizon(double bound, double rate, double a, double tol) {
  if (bound <= 0.0) return a;
  const double t = std::log(bound / (rate * tol)) / rate;
  return std::max(a, t);
}

}  // namespace dispersia
