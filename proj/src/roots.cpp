#include "dispersia/roots.hpp"

#include <Eigen/Core>
#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cmath>

namespace dispersia {

namespace {

constexpr double kRealTol = 1e-10;
constexpr double kNearAxisTol = 1e-6;
constexpr double kTouchTol = 1e-10;

std::complex<double> polish(const RealPoly& p, const RealPoly& dp, std::complex<double> r) {
  for (int it = 0; it < 4; ++it) {
    const std::complex<double> f = p(r);
    const std::complex<double> df = dp(r);
    if (std::abs(df) == 0.0) break;
    const std::complex<double> next = r - f / df;
    if (!(std::abs(p(next)) < std::abs(f))) break;
    r = next;
  }
  return r;
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(const RealPoly& p) {
  std::vector<std::complex<double>> out;
  if (p.degree() <= 0) return out;

  std::size_t zeros = 0;
  while (zeros < p.size() && p.coeffs()[zeros] == 0.0) ++zeros;
  out.assign(zeros, {0.0, 0.0});

  std::vector<double> rest(p.coeffs().begin() + static_cast<std::ptrdiff_t>(zeros), p.coeffs().end());
  const RealPoly q(rest);
  if (q.degree() <= 0) return out;
  if (q.degree() == 1) {
    out.emplace_back(-q[0] / q[1], 0.0);
    return out;
  }

  Eigen::VectorXd c(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) c[static_cast<Eigen::Index>(i)] = q[i];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(c);
  const RealPoly dq = q.derivative();
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) out.push_back(polish(q, dq, solver.roots()[i]));
  return out;
}

bool SignProfile::positive_off_zero() const {
  if (identically_zero || !negative_at.empty()) return false;
  return std::all_of(real_roots.begin(), real_roots.end(), [](double r) { return r == 0.0; });
}

SignProfile sign_profile(const RealPoly& p, SignDomain domain) {
  SignProfile prof;
  if (p.is_zero()) {
    prof.identically_zero = true;
    return prof;
  }
  const RealPoly scale = abs_coeffs(p);
  for (const auto& r : polynomial_roots(p)) {
    const double a = r.real();
    const double b = std::abs(r.imag());
    bool real = b < kRealTol * (1.0 + std::abs(a));
    if (!real && b < kNearAxisTol * (1.0 + std::abs(a))) {
      real = std::abs(p(a)) <= kTouchTol * scale(std::abs(a));
    }
    if (!real) continue;
    if (domain == SignDomain::half_line && a < 0.0) {
      // Roots within rounding of zero count as the origin.
      if (a > -kRealTol) prof.real_roots.push_back(0.0);
      continue;
    }
    prof.real_roots.push_back(std::abs(a) < kRealTol ? 0.0 : a);
  }
  std::sort(prof.real_roots.begin(), prof.real_roots.end());
  prof.real_roots.erase(std::unique(prof.real_roots.begin(), prof.real_roots.end(),
                                    [](double x, double y) { return std::abs(x - y) <= kRealTol * (1.0 + std::abs(x)); }),
                        prof.real_roots.end());

  std::vector<double> breaks = prof.real_roots;
  if (domain == SignDomain::half_line && (breaks.empty() || breaks.front() > 0.0)) breaks.insert(breaks.begin(), 0.0);

  if (breaks.empty()) {
    prof.test_points.push_back(0.0);
  } else {
    if (domain == SignDomain::whole_line) prof.test_points.push_back(breaks.front() - std::max(1.0, std::abs(breaks.front())));
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) prof.test_points.push_back(0.5 * (breaks[i] + breaks[i + 1]));
    prof.test_points.push_back(breaks.back() + std::max(1.0, std::abs(breaks.back())));
  }
  for (double x : prof.test_points)
    if (p(x) < 0.0) prof.negative_at.push_back(x);
  return prof;
}

}  // namespace dispersia
