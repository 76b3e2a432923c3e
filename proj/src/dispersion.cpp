#include "dispersia/dispersion.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dispersia/errors.hpp"
#include "dispersia/log.hpp"
#include "dispersia/roots.hpp"

namespace dispersia {

using cplx = std::complex<double>;

std::complex<double> OmegaRational::operator()(double omega) const {
  return {Pr(omega) / Qr(omega), Pi(omega) / Qi(omega)};
}

namespace {

constexpr double kCancelTol = 1e-11;
constexpr double kParityTol = 1e-9;
constexpr double kFactorTol = 1e-9;

// Zero the coefficients that are rounding residue of cancelling contributions.
RealPoly clean(const RealPoly& v, const RealPoly& scale) {
  std::vector<double> c = v.coeffs();
  for (std::size_t k = 0; k < c.size(); ++k)
    if (std::abs(c[k]) <= kCancelTol * scale[k]) c[k] = 0.0;
  return RealPoly(std::move(c));
}

// parity 0 keeps even powers, 1 keeps odd powers.
RealPoly project(const RealPoly& v, const RealPoly& scale, int parity, bool strict) {
  std::vector<double> c = v.coeffs();
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (static_cast<int>(k % 2) == parity) continue;
    if (strict && std::abs(c[k]) > kParityTol * std::max(scale[k], std::numeric_limits<double>::min()))
      throw NumericError("frequency response lost its parity symmetry");
    c[k] = 0.0;
  }
  return RealPoly(std::move(c));
}

RealPoly rpow(const RealPoly& p, int n) { return n <= 0 ? RealPoly::constant(1.0) : p.pow(static_cast<unsigned>(n)); }
ComplexPoly cpow(const ComplexPoly& p, int n) {
  return n <= 0 ? ComplexPoly::constant({1.0, 0.0}) : p.pow(static_cast<unsigned>(n));
}

struct EvenFactor {
  RealPoly q;   // even polynomial in omega with no real roots
  cplx root;    // one of its roots
  int multiplicity;
};

void reduce(RealPoly& p, RealPoly& q, const std::vector<EvenFactor>& factors, int parity) {
  for (const auto& f : factors) {
    for (int n = 0; n < f.multiplicity && !p.is_zero(); ++n) {
      const double size = abs_coeffs(p)(std::abs(f.root));
      if (std::abs(p(f.root)) > kFactorTol * size) break;
      p = f.q.size() <= p.size() ? p.divmod(f.q).first : RealPoly{};
      q = q.divmod(f.q).first;
    }
  }
  p = project(p, abs_coeffs(p), parity, false);
  q = project(q, abs_coeffs(q), 0, false);
  if (!q.is_zero()) {
    // Keep a monic denominator so leading ratios read directly.
    const double lead = q.leading();
    q *= 1.0 / lead;
    p *= 1.0 / lead;
  }
}

}  // namespace

OmegaRational omega_form(const ExpPolyKernel& kernel) {
  for (const auto& t : kernel.terms())
    if (t.x >= 0.0) throw NotInClassK("frequency response needs decaying kernel terms");

  const double c = kernel.asymptotic_value();
  const auto& terms = kernel.conjugate_closed_terms(0);
  OmegaRational out;
  out.Qr = out.Qi = RealPoly{1.0};
  if (terms.empty()) {
    out.Pr = c == 0.0 ? RealPoly{} : RealPoly{c};
    return out;
  }

  const cplx I{0.0, 1.0};
  const std::size_t n = terms.size();
  std::vector<RealPoly> q(n), qa(n);
  std::vector<ComplexPoly> h(n);
  std::vector<int> mult(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx z = terms[j].z;
    q[j] = RealPoly{std::norm(z), -2.0 * z.imag(), 1.0};
    qa[j] = abs_coeffs(q[j]);
    h[j] = ComplexPoly{-std::conj(z), -I};
    mult[j] = static_cast<int>(terms[j].poly.size());
  }

  RealPoly Q{1.0}, Qa{1.0};
  for (std::size_t j = 0; j < n; ++j) {
    Q = Q * rpow(q[j], mult[j]);
    Qa = Qa * rpow(qa[j], mult[j]);
  }

  const ComplexPoly iw{0.0, I};
  const RealPoly w{0.0, 1.0};
  ComplexPoly N;
  RealPoly Na;
  for (std::size_t j = 0; j < n; ++j) {
    RealPoly others{1.0}, others_a{1.0};
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      others = others * rpow(q[k], mult[k]);
      others_a = others_a * rpow(qa[k], mult[k]);
    }
    double fact = 1.0;
    for (int l = 0; l < mult[j]; ++l) {
      if (l > 0) fact *= l;
      const cplx coef = fact * terms[j].poly[static_cast<std::size_t>(l)];
      if (coef == cplx{0.0, 0.0}) continue;
      const RealPoly rest = rpow(q[j], mult[j] - l - 1) * others;
      N += (iw * cpow(h[j], l + 1) * to_complex(rest)) * coef;
      const RealPoly rest_a = rpow(qa[j], mult[j] - l - 1) * others_a;
      Na += w * rpow(abs_coeffs(h[j]), l + 1) * rest_a * std::abs(coef);
    }
  }

  const RealPoly Pr_a = Na + Qa * std::abs(c);
  RealPoly Pr = clean(real_part(N) + Q * c, Pr_a);
  RealPoly Pi = clean(imag_part(N), Na);
  RealPoly Qc = clean(Q, Qa);
  Pr = project(Pr, Pr_a, 0, true);
  Pi = project(Pi, Na, 1, true);
  Qc = project(Qc, Qa, 0, true);

  std::vector<EvenFactor> factors;
  for (const auto& t : kernel.real_part_terms(0)) {
    const double x = t.z.real(), y = t.z.imag();
    const RealPoly qz{x * x + y * y, -2.0 * y, 1.0};
    const RealPoly qf = y == 0.0 ? qz : qz * RealPoly{x * x + y * y, 2.0 * y, 1.0};
    factors.push_back({qf, cplx{y, std::abs(x)}, static_cast<int>(t.poly.size())});
  }

  out.Pr = Pr;
  out.Qr = Qc;
  reduce(out.Pr, out.Qr, factors, 0);
  out.Pi = Pi;
  out.Qi = Qc;
  reduce(out.Pi, out.Qi, factors, 1);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Field {
  const char* label;
  std::optional<OmegaRational> rational;
  const SampledKernel* sampled = nullptr;
  const Kernel* kernel = nullptr;

  [[nodiscard]] double re(double w) const {
    if (rational) return rational->real_part(w);
    if (sampled->has_fast_response()) return sampled->fast_response(w).real();
    return omega_response(*kernel, w).real();
  }
  [[nodiscard]] bool fast() const { return rational || sampled->has_fast_response(); }
  /// Rounding floor for grid values: |i w L nu| <= |nu(0)| + C / delta^2.
  [[nodiscard]] double noise() const {
    if (rational) return 0.0;
    const auto [C, delta] = sampled->bound();
    return 1e-12 * (std::abs(sampled->eval(0.0)) + C / (delta * delta));
  }
};

Field make_field(const char* label, const Kernel& k) {
  Field f;
  f.label = label;
  f.kernel = &k;
  if (const auto* e = std::get_if<ExpPolyKernel>(&k)) f.rational = omega_form(*e);
  else f.sampled = &std::get<SampledKernel>(k);
  return f;
}

std::vector<double> scan_grid(const Field& a, const Field& b, const SampledScan& scan) {
  std::vector<double> g;
  if (a.fast() && b.fast()) {
    const std::size_t n = std::max<std::size_t>(scan.points, 2);
    g.reserve(n);
    for (std::size_t i = 0; i < n; ++i) g.push_back(scan.omega_max * static_cast<double>(i) / static_cast<double>(n - 1));
  } else {
    const std::size_t n = std::max<std::size_t>(scan.quadrature_points, 2);
    g.push_back(0.0);
    for (std::size_t i = 0; i < n; ++i)
      g.push_back(1e-2 * std::pow(scan.quadrature_omega_max / 1e-2, static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  return g;
}

void finish_witnesses(std::vector<double>& w) {
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end()), w.end());
  constexpr std::size_t kMax = 16;
  if (w.size() > kMax) w.resize(kMax);
}

PassivityReport passivity_impl(const Field& E, const Field& H, const SampledScan& scan) {
  PassivityReport r;
  r.exact = E.rational && H.rational;
  std::vector<double> grid;
  for (const Field* f : {&E, &H}) {
    if (f->rational) {
      const auto prof = sign_profile(f->rational->Pr, SignDomain::half_line);
      r.witnesses.insert(r.witnesses.end(), prof.negative_at.begin(), prof.negative_at.end());
      continue;
    }
    if (grid.empty()) grid = scan_grid(E, H, scan);
    log_debug("passivity scan of %s over %zu frequencies", f->label, grid.size());
    const double floor = f->noise();
    for (double w : grid)
      if (f->re(w) < -floor) r.witnesses.push_back(w);
  }
  finish_witnesses(r.witnesses);
  r.passive = r.witnesses.empty();
  if (!r.exact) r.note = "checked numerically on a frequency grid, not certified";
  return r;
}

PassivityReport strict_impl(const Field& E, const Field& H, const SampledScan& scan) {
  PassivityReport r = passivity_impl(E, H, scan);
  if (!r.passive) return r;
  if (r.exact) {
    const RealPoly combined = E.rational->Pr * H.rational->Qr + H.rational->Pr * E.rational->Qr;
    if (combined.is_zero()) {
      r.note = "combined real part vanishes identically";
      return r;
    }
    const auto prof = sign_profile(combined, SignDomain::half_line);
    r.strictly_passive = prof.positive_off_zero();
    for (double x : prof.real_roots)
      if (x > 0.0) r.witnesses.push_back(x);
    r.witnesses.insert(r.witnesses.end(), prof.negative_at.begin(), prof.negative_at.end());
  } else {
    for (double w : scan_grid(E, H, scan))
      if (w > 0.0 && !(E.re(w) + H.re(w) > 0.0)) r.witnesses.push_back(w);
    r.strictly_passive = r.witnesses.empty();
  }
  finish_witnesses(r.witnesses);
  return r;
}

struct Asymptote {
  bool active = false;
  int deficit = 0;
  double lead = 0.0;
};

Asymptote asymptote(const Field& f, const SampledScan& scan) {
  Asymptote a;
  if (f.rational) {
    const auto& R = *f.rational;
    if (R.Pr.is_zero()) return a;
    a.active = true;
    a.deficit = R.Qr.degree() - R.Pr.degree();
    a.lead = R.Pr.leading() / R.Qr.leading();
    return a;
  }
  const double hi = f.fast() ? scan.omega_max : scan.quadrature_omega_max;
  const double lo = 0.1 * hi;
  const double rl = f.re(lo), rh = f.re(hi);
  if (rl == 0.0 && rh == 0.0) return a;
  a.active = true;
  if (rl < 0.0 || rh < 0.0) {
    a.lead = -1.0;
    return a;
  }
  const double slope = std::log(rh / rl) / std::log(hi / lo);
  a.deficit = static_cast<int>(std::lround(-slope));
  if (std::abs(-slope - a.deficit) > 0.25)
    throw NoDecayExponent(std::string("asymptotic slope of the ") + f.label + " response is not an integer");
  a.lead = rh * std::pow(hi, a.deficit);
  return a;
}

double max_real_root(const Field& f) {
  if (!f.rational || f.rational->Pr.is_zero()) return 0.0;
  double m = 0.0;
  for (double x : sign_profile(f.rational->Pr, SignDomain::whole_line).real_roots) m = std::max(m, std::abs(x));
  return m;
}

// min over [omega0, inf) of |omega|^m Re(i omega L nu(i omega)).
double lower_bound(const Field& f, int m, double omega0, const SampledScan& scan) {
  auto g = [&](double w) { return std::pow(w, m) * f.re(w); };
  const double top = f.rational ? std::max(1e4, 10.0 * omega0) : (f.fast() ? scan.omega_max : scan.quadrature_omega_max);
  const int n = f.fast() ? 2000 : 200;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = omega0 * std::pow(top / omega0, static_cast<double>(i) / (n - 1));

  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = g(grid[i]);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  const double a = grid[arg == 0 ? 0 : arg - 1];
  const double b = grid[std::min(arg + 1, grid.size() - 1)];
  if (b > a) best = std::min(best, boost::math::tools::brent_find_minima(g, a, b, 40).second);

  if (f.rational) {
    // Beyond the grid use s = 1/omega, where |omega|^m Pr/Qr = rev(Pr)(s) / rev(Qr)(s).
    std::vector<double> pr(f.rational->Pr.coeffs().rbegin(), f.rational->Pr.coeffs().rend());
    std::vector<double> qr(f.rational->Qr.coeffs().rbegin(), f.rational->Qr.coeffs().rend());
    const RealPoly P(pr), Q(qr);
    for (int i = 0; i <= 500; ++i) {
      const double s = (1.0 / top) * i / 500.0;
      best = std::min(best, P(s) / Q(s));
    }
  }
  return best;
}

PassivityReport exponent_impl(const Field& E, const Field& H, PassivityReport r, const SampledScan& scan) {
  if (!r.strictly_passive) throw NoDecayExponent("medium is not strictly passive");
  const Asymptote aE = asymptote(E, scan);
  const Asymptote aH = asymptote(H, scan);
  for (auto [a, f] : {std::pair{aE, &E}, std::pair{aH, &H}}) {
    if (!a.active) continue;
    if (!(a.lead > 0.0))
      throw NoDecayExponent(std::string("leading coefficient ratio of the ") + f->label + " response is not positive");
    if (a.deficit % 2 != 0)
      throw NoDecayExponent(std::string("degree deficit of the ") + f->label + " response is odd");
  }
  if (!aE.active && !aH.active) throw NoDecayExponent("both responses vanish");

  int m = std::numeric_limits<int>::max();
  if (aE.active) m = std::min(m, aE.deficit);
  if (aH.active) m = std::min(m, aH.deficit);
  if (m < 0) throw NoDecayExponent("response grows at high frequency");

  r.omega0 = 2.0 * std::max(max_real_root(E), max_real_root(H)) + 1.0;
  auto sigma = [&](const Asymptote& a, const Field& f) {
    if (!a.active || a.deficit != m) return 0.0;
    return std::min(a.lead, lower_bound(f, m, r.omega0, scan)) * (1.0 - 1e-9);
  };
  r.sigma_E = sigma(aE, E);
  r.sigma_H = sigma(aH, H);
  if (r.sigma_E < 0.0 || r.sigma_H < 0.0 || !(r.sigma_E + r.sigma_H > 0.0))
    throw NoDecayExponent("no positive lower bound above omega0");
  r.m = m;
  return r;
}

}  // namespace

PassivityReport check_passivity(const Kernel& nuE, const Kernel& nuH, const SampledScan& scan) {
  return passivity_impl(make_field("E", nuE), make_field("H", nuH), scan);
}

PassivityReport check_strict_passivity(const Kernel& nuE, const Kernel& nuH, const SampledScan& scan) {
  return strict_impl(make_field("E", nuE), make_field("H", nuH), scan);
}

PassivityReport decay_exponent(const Kernel& nuE, const Kernel& nuH, const SampledScan& scan) {
  const Field E = make_field("E", nuE), H = make_field("H", nuH);
  return exponent_impl(E, H, strict_impl(E, H, scan), scan);
}

PassivityReport analyze(const Kernel& nuE, const Kernel& nuH, const SampledScan& scan) {
  const Field E = make_field("E", nuE), H = make_field("H", nuH);
  PassivityReport r = strict_impl(E, H, scan);
  if (!r.strictly_passive) return r;
  try {
    return exponent_impl(E, H, r, scan);
  } catch (const NoDecayExponent& e) {
    r.note = e.what();
    return r;
  }
}

}  // namespace dispersia
