#include "dispersia/kernel.hpp"

#include <gsl/gsl_sf_dawson.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dispersia/errors.hpp"
#include "dispersia/quadrature.hpp"

namespace dispersia {

using cplx = std::complex<double>;

namespace {

constexpr double kRealnessTol = 1e-12;
constexpr double kSampledSlack = 1e-9;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw KernelError(std::string("non-finite ") + what);
}

// W' + z W
ComplexPoly differentiate(const ComplexPoly& w, cplx z) { return w.derivative() + w * z; }

struct FoldGroup {
  double x;
  double y;  // >= 0
  RealPoly cos_part, sin_part;
  RealPoly im_cos, im_sin;  // imaginary residue, must cancel
  double scale = 0.0;
};

double max_abs(const RealPoly& p) {
  double m = 0.0;
  for (double c : p.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

std::string fmt_z(cplx z) {
  std::ostringstream os;
  os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return os.str();
}

double panel_width_for(const Kernel& k) {
  if (const auto* e = std::get_if<ExpPolyKernel>(&k)) {
    const double y = e->max_frequency();
    return y > 2.0 ? 1.0 / y : 0.5;
  }
  return std::get<SampledKernel>(k).panel_width();
}

}  // namespace

// ---------------------------------------------------------------------------
// ExpPolyKernel

ExpPolyKernel::ExpPolyKernel() { build_forms(); }

ExpPolyKernel ExpPolyKernel::from_terms(const std::vector<ComplexTerm>& terms) {
  std::vector<FoldGroup> groups;
  cplx constant{0.0, 0.0};
  double constant_scale = 0.0;

  for (const auto& term : terms) {
    require_finite(term.z.real(), "exponent");
    require_finite(term.z.imag(), "exponent");
    for (const auto& c : term.poly.coeffs()) {
      require_finite(c.real(), "coefficient");
      require_finite(c.imag(), "coefficient");
    }
    if (term.poly.is_zero()) continue;

    if (term.z == cplx{0.0, 0.0} && term.poly.degree() == 0) {
      constant += term.poly[0];
      constant_scale = std::max(constant_scale, std::abs(term.poly[0]));
      continue;
    }

    const double x = term.z.real();
    const double y = std::abs(term.z.imag());
    auto it = std::find_if(groups.begin(), groups.end(), [&](const FoldGroup& g) {
      return std::abs(g.x - x) <= 1e-14 * (1.0 + std::abs(x)) && std::abs(g.y - y) <= 1e-14 * (1.0 + y);
    });
    if (it == groups.end()) {
      groups.push_back(FoldGroup{x, y, {}, {}, {}, {}, 0.0});
      it = groups.end() - 1;
    }
    const RealPoly re = real_part(term.poly);
    const RealPoly im = imag_part(term.poly);
    it->scale = std::max({it->scale, max_abs(re), max_abs(im)});
    if (y == 0.0) {
      it->cos_part += re;
      it->im_cos += im;
    } else if (term.z.imag() > 0.0) {
      it->cos_part += re;
      it->sin_part -= im;
      it->im_cos += im;
      it->im_sin += re;
    } else {
      it->cos_part += re;
      it->sin_part += im;
      it->im_cos += im;
      it->im_sin -= re;
    }
  }

  if (std::abs(constant.imag()) > kRealnessTol * std::max(1.0, constant_scale))
    throw KernelError("kernel is not real-valued: constant term has imaginary part");

  std::vector<RealTerm> real_terms;
  for (auto& g : groups) {
    const double tol = kRealnessTol * std::max(1.0, g.scale);
    if (max_abs(g.im_cos) > tol || max_abs(g.im_sin) > tol)
      throw KernelError("kernel is not real-valued: terms at z = " + fmt_z({g.x, g.y}) +
                        " are not closed under conjugation");
    real_terms.push_back(RealTerm{g.cos_part, g.sin_part, g.x, g.y});
  }
  return from_real_terms(std::move(real_terms), constant.real());
}

ExpPolyKernel ExpPolyKernel::from_real_terms(std::vector<RealTerm> terms, double asymptotic_value) {
  require_finite(asymptotic_value, "constant");
  ExpPolyKernel k;
  k.asymptotic_ = asymptotic_value;
  for (auto& t : terms) {
    require_finite(t.x, "exponent");
    require_finite(t.y, "exponent");
    for (double c : t.cos_part.coeffs()) require_finite(c, "coefficient");
    for (double c : t.sin_part.coeffs()) require_finite(c, "coefficient");
    if (t.y < 0.0) {
      t.y = -t.y;
      t.sin_part = -t.sin_part;
    }
    if (t.y == 0.0) t.sin_part = {};
    if (t.cos_part.is_zero() && t.sin_part.is_zero()) continue;
    if (t.x == 0.0 && t.y == 0.0 && t.cos_part.degree() == 0) {
      k.asymptotic_ += t.cos_part[0];
      continue;
    }
    k.terms_.push_back(std::move(t));
  }
  k.build_forms();
  return k;
}

ExpPolyKernel ExpPolyKernel::debye(double beta, double tau) {
  if (!(tau > 0.0)) throw KernelError("Debye relaxation time must be positive");
  return from_real_terms({RealTerm{RealPoly{beta}, {}, -1.0 / tau, 0.0}});
}

ExpPolyKernel ExpPolyKernel::lorentz(double beta, double nu0, double nu) {
  if (!(nu > 0.0)) throw KernelError("Lorentz damping must be positive");
  return from_real_terms({RealTerm{{}, RealPoly{beta}, -0.5 * nu, nu0}});
}

ExpPolyKernel ExpPolyKernel::drude(double beta, double nu) {
  if (!(nu > 0.0)) throw KernelError("Drude collision rate must be positive");
  return from_real_terms({RealTerm{RealPoly{-beta}, {}, -nu, 0.0}}, beta);
}

void ExpPolyKernel::build_forms() {
  for (auto& f : forms_) f.clear();
  for (const auto& t : terms_) {
    const cplx z{t.x, t.y};
    ComplexPoly w = to_complex(t.cos_part) - to_complex(t.sin_part) * cplx{0.0, 1.0};
    for (int order = 0; order < 3; ++order) {
      forms_[static_cast<std::size_t>(order)].push_back(ComplexTerm{w, z});
      w = differentiate(w, z);
    }
  }
}

const std::vector<ComplexTerm>& ExpPolyKernel::real_part_terms(int order) const {
  if (order < 0 || order > 2) throw std::domain_error("derivative order must be 0, 1 or 2");
  return forms_[static_cast<std::size_t>(order)];
}

std::vector<ComplexTerm> ExpPolyKernel::conjugate_closed_terms(int order) const {
  std::vector<ComplexTerm> out;
  for (const auto& t : real_part_terms(order)) {
    if (t.z.imag() == 0.0) {
      out.push_back(ComplexTerm{to_complex(real_part(t.poly)), t.z});
    } else {
      out.push_back(ComplexTerm{t.poly * cplx{0.5, 0.0}, t.z});
      out.push_back(ComplexTerm{conj_coeffs(t.poly) * cplx{0.5, 0.0}, std::conj(t.z)});
    }
  }
  return out;
}

double ExpPolyKernel::min_decay_rate() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) m = std::min(m, -t.x);
  return m;
}

double ExpPolyKernel::max_frequency() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, t.y);
  return m;
}

double ExpPolyKernel::eval(double t, int order) const {
  if (!(t >= 0.0)) throw std::domain_error("kernel evaluated at negative time");
  double acc = order == 0 ? asymptotic_ : 0.0;
  for (const auto& term : real_part_terms(order)) {
    const cplx e = std::exp(term.z.real() * t) * cplx{std::cos(term.z.imag() * t), std::sin(term.z.imag() * t)};
    acc += (term.poly(t) * e).real();
  }
  return acc;
}

cplx ExpPolyKernel::laplace(cplx lambda) const {
  cplx acc{0.0, 0.0};
  if (asymptotic_ != 0.0) {
    if (lambda == cplx{0.0, 0.0}) throw UnsupportedPoint("Laplace transform of a kernel with nonzero limit at lambda = 0");
    acc += asymptotic_ / lambda;
  }
  for (const auto& term : conjugate_closed_terms(0)) {
    const cplx d = lambda - term.z;
    if (d == cplx{0.0, 0.0}) throw UnsupportedPoint("Laplace transform evaluated at a kernel exponent");
    const cplx inv = 1.0 / d;
    cplx pw = inv;
    double fact = 1.0;
    for (std::size_t l = 0; l < term.poly.size(); ++l) {
      if (l > 0) fact *= static_cast<double>(l);
      acc += fact * term.poly[l] * pw;
      pw *= inv;
    }
  }
  return acc;
}

ExpPolyKernel ExpPolyKernel::derivative() const {
  std::vector<RealTerm> out;
  for (const auto& t : real_part_terms(1)) {
    out.push_back(RealTerm{real_part(t.poly), -imag_part(t.poly), t.z.real(), t.z.imag()});
  }
  return from_real_terms(std::move(out));
}

// ---------------------------------------------------------------------------
// SampledKernel

SampledKernel::SampledKernel(std::string name, Evaluator evaluator, DecayBound bound, double panel_width,
                             OmegaResponse response)
    : name_(std::move(name)),
      evaluator_(std::move(evaluator)),
      bound_(bound),
      panel_width_(panel_width),
      response_(std::move(response)) {
  if (!evaluator_) throw KernelError("sampled kernel needs an evaluator");
  if (!(bound_.C > 0.0) || !std::isfinite(bound_.C)) throw KernelError("decay bound C must be positive");
  if (!(bound_.delta > 0.0) || !std::isfinite(bound_.delta)) throw KernelError("decay bound delta must be positive");
  if (!(panel_width_ > 0.0)) throw KernelError("panel width must be positive");
}


SampledKernel SampledKernel::builtin(const std::string& name, DecayBound bound) {
  if (name == "gaussian") {
    auto ev = [](double t) -> std::array<double, 3> {
      const double g = std::exp(-t * t);
      return {g, -2.0 * t * g, (4.0 * t * t - 2.0) * g};
    };
    auto response = [](double w) -> cplx {
      const double a = std::abs(w);
      return {a * gsl_sf_dawson(0.5 * a), 0.5 * std::sqrt(std::numbers::pi) * w * std::exp(-0.25 * w * w)};
    };
    return SampledKernel(name, ev, bound, 0.5, response);
  }
  if (name == "exponential") {
    auto ev = [](double t) -> std::array<double, 3> {
      const double g = std::exp(-t);
      return {g, -g, g};
    };
    auto response = [](double w) -> cplx { return cplx{0.0, w} / cplx{1.0, w}; };
    return SampledKernel(name, ev, bound, 0.5, response);
  }
  throw KernelError("unknown builtin kernel '" + name + "'");
}

std::vector<std::string> SampledKernel::builtin_names() { return {"gaussian", "exponential"}; }

SampledKernel SampledKernel::wrap(const ExpPolyKernel& kernel, DecayBound bound) {
  auto ev = [kernel](double t) -> std::array<double, 3> { return {kernel.eval(t, 0), kernel.eval(t, 1), kernel.eval(t, 2)}; };
  const double y = kernel.max_frequency();
  return SampledKernel("wrapped", ev, bound, y > 2.0 ? 1.0 / y : 0.5);
}

std::array<double, 3> SampledKernel::eval_all(double t) const {
  if (!(t >= 0.0)) throw std::domain_error("kernel evaluated at negative time");
  return evaluator_(t);
}

double SampledKernel::eval(double t, int order) const {
  if (order < 0 || order > 2) throw std::domain_error("derivative order must be 0, 1 or 2");
  return eval_all(t)[static_cast<std::size_t>(order)];
}

cplx SampledKernel::fast_response(double omega) const {
  if (!response_) throw Unsupported("kernel '" + name_ + "' has no closed-form frequency response");
  return response_(omega);
}

// ---------------------------------------------------------------------------
// free functions

double eval(const Kernel& kernel, double t, int order) {
  return std::visit([&](const auto& k) { return k.eval(t, order); }, kernel);
}

ClassKCertificate certify_class_K(const ExpPolyKernel& kernel) {
  for (const auto& t : kernel.terms()) {
    if (t.x >= 0.0)
      throw NotInClassK("kernel term with exponent " + fmt_z({t.x, t.y}) + " does not decay (Re z >= 0)");
  }

  ClassKCertificate cert;
  const double rate = kernel.min_decay_rate();
  cert.delta = std::isfinite(rate) ? 0.9 * rate : 1.0;
  const double delta = cert.delta;
  const double horizon = 20.0 / delta;
  cert.checked_horizon = horizon;

  constexpr int n = 10000;
  std::vector<double> grid;
  grid.reserve(n + 1);
  grid.push_back(0.0);
  for (int i = 0; i < n; ++i) grid.push_back(horizon * std::pow(10.0, -6.0 + 6.0 * i / (n - 1)));

  double gmax = 0.0;
  for (double t : grid) gmax = std::max(gmax, std::abs(kernel.eval(t, 2)) * std::exp(delta * t));

  // sup_{t >= T} t^k e^{-a t} sits at max(T, k/a).
  double tail = 0.0;
  for (const auto& term : kernel.real_part_terms(2)) {
    const double a = -term.z.real() - delta;
    for (std::size_t k = 0; k < term.poly.size(); ++k) {
      const double ts = std::max(horizon, static_cast<double>(k) / a);
      tail += std::abs(term.poly[k]) * std::pow(ts, static_cast<double>(k)) * std::exp(-a * ts);
    }
  }

  cert.C = 1.05 * std::max(gmax, tail);
  if (cert.C == 0.0) cert.C = 1.0;

  cert.max_violation = -std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  for (double t : grid) {
    const double v = std::abs(kernel.eval(t, 2)) - cert.weight(t);
    if (v > cert.max_violation) {
      cert.max_violation = v;
      worst_t = t;
    }
  }
  if (cert.max_violation > 0.0) throw CertificationFailure("second-derivative bound violated", worst_t);

  const double d1 = std::abs(kernel.eval(horizon, 1));
  if (d1 > (cert.C / delta) * std::exp(-delta * horizon) * (1.0 + 1e-9) + 1e-300)
    throw CertificationFailure("first derivative does not vanish at the horizon", horizon);

  const Kernel wrapped = kernel;
  const double tol = 1e-9 * std::max(1.0, cert.C / delta);
  for (double t : {0.0, 1.0, 10.0}) {
    const double r = kernel.eval(t, 1) + tail_integral_second_derivative(wrapped, t, cert.bound());
    if (!(std::abs(r) <= tol)) throw CertificationFailure("first derivative is not the tail integral of the second", t);
  }
  return cert;
}

ClassKCertificate certify_class_K(const SampledKernel& kernel) {
  const auto [C, delta] = kernel.bound();
  ClassKCertificate cert{C, delta, 50.0 / delta, 0.0};

  constexpr int n = 4000;
  double worst = -std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  auto probe = [&](double t) {
    const double v = std::abs(kernel.eval(t, 2)) - cert.weight(t);
    if (!std::isfinite(v)) throw CertificationFailure("kernel is not finite", t);
    if (v > worst) {
      worst = v;
      worst_t = t;
    }
  };
  probe(0.0);
  for (int i = 0; i < n; ++i) probe(cert.checked_horizon * std::pow(10.0, -6.0 + 6.0 * i / (n - 1)));
  cert.max_violation = worst;
  if (worst > kSampledSlack) {
    std::ostringstream os;
    os << "declared bound |nu''(t)| <= " << C << " exp(-" << delta << " t) fails at t = " << worst_t;
    throw CertificationFailure(os.str(), worst_t);
  }
  const double h = cert.checked_horizon;
  if (std::abs(kernel.eval(h, 1)) > (C / delta) * std::exp(-delta * h) + kSampledSlack)
    throw CertificationFailure("first derivative does not vanish at the horizon", h);
  return cert;
}

ClassKCertificate certify_class_K(const Kernel& kernel) {
  return std::visit([](const auto& k) { return certify_class_K(k); }, kernel);
}

double tail_integral_second_derivative(const Kernel& kernel, double t, const DecayBound& bound) {
  const double end = tail_horizon(bound.C, bound.delta, t, 1e-15) + 1.0;
  auto f = [&](double s) { return eval(kernel, s, 2); };
  return integrate_panels(f, t, end, panel_width_for(kernel));
}

cplx laplace_of_derivative_quadrature(const Kernel& kernel, int order, cplx lambda, const DecayBound& bound,
                                      double abs_tol) {
  if (order < 1 || order > 2) throw std::domain_error("quadrature Laplace needs derivative order 1 or 2");
  if (lambda.real() < 0.0) throw UnsupportedPoint("quadrature Laplace needs Re lambda >= 0");
  const double rate = bound.delta + lambda.real();
  const double amp = order == 2 ? bound.C : bound.C / bound.delta;
  const double end = tail_horizon(amp, rate, 0.0, abs_tol);
  double h = panel_width_for(kernel);
  if (lambda.imag() != 0.0) h = std::min(h, 1.0 / std::abs(lambda.imag()));
  auto f = [&](double s) { return std::exp(-lambda * s) * eval(kernel, s, order); };
  return integrate_panels(f, 0.0, end, h);
}

cplx laplace_quadrature(const SampledKernel& kernel, cplx lambda) {
  if (lambda == cplx{0.0, 0.0}) throw UnsupportedPoint("quadrature Laplace transform at lambda = 0");
  if (lambda.real() < 0.0) throw UnsupportedPoint("quadrature Laplace needs Re lambda >= 0");
  const auto [C, delta] = kernel.bound();
  const Kernel k = kernel;
  const auto v = kernel.eval_all(0.0);

  if (lambda.real() > 0.5 * delta) {
    // |nu(t)| <= |nu(0)| + int |nu'| <= |nu(0)| + C / delta^2
    const double amp = std::abs(v[0]) + C / (delta * delta);
    const double end = tail_horizon(amp, lambda.real(), 0.0, 1e-13);
    double h = kernel.panel_width();
    if (lambda.imag() != 0.0) h = std::min(h, 1.0 / std::abs(lambda.imag()));
    auto f = [&](double s) { return std::exp(-lambda * s) * kernel.eval(s, 0); };
    return integrate_panels(f, 0.0, end, h);
  }
  const double mag = std::abs(lambda);
  const cplx l2 = laplace_of_derivative_quadrature(k, 2, lambda, kernel.bound(), 1e-13 * std::min(1.0, mag * mag));
  return (v[0] + (v[1] + l2) / lambda) / lambda;
}

cplx laplace(const Kernel& kernel, cplx lambda) {
  if (const auto* e = std::get_if<ExpPolyKernel>(&kernel)) return e->laplace(lambda);
  return laplace_quadrature(std::get<SampledKernel>(kernel), lambda);
}

cplx omega_response(const Kernel& kernel, double omega) {
  if (omega != 0.0) return cplx{0.0, omega} * laplace(kernel, cplx{0.0, omega});
  // lambda L nu(lambda) -> nu(0) + L nu'(0) = nu(inf)
  if (const auto* e = std::get_if<ExpPolyKernel>(&kernel)) return e->eval(0.0) + e->derivative().laplace(0.0);
  const auto& s = std::get<SampledKernel>(kernel);
  return s.eval(0.0) + laplace_of_derivative_quadrature(kernel, 1, 0.0, s.bound());
}

}  // namespace dispersia
