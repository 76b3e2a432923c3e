#include "dispersia/modal.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "dispersia/errors.hpp"
#include "dispersia/log.hpp"
#include "dispersia/roots.hpp"

namespace dispersia {

using cplx = std::complex<double>;

void MediumSpec::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("permittivity must be positive");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("permeability must be positive");
}

namespace {

const ExpPolyKernel& closed_form(const Kernel& k, const char* which) {
  const auto* e = std::get_if<ExpPolyKernel>(&k);
  if (e == nullptr)
    throw Unsupported(std::string("the ") + which + " kernel is sampled; no finite memory closure exists");
  return *e;
}

std::size_t memory_size(const ExpPolyKernel& k) {
  std::size_t n = 0;
  for (const auto& t : k.real_part_terms(1)) n += t.poly.size() * (t.z.imag() == 0.0 ? 1 : 2);
  return n;
}

// Memory chains of one field; `row` is the field's equation, `scale` 1/eps or 1/mu.
void add_memory(Eigen::MatrixXd& A, const ExpPolyKernel& k, std::size_t field, std::size_t row, std::size_t begin,
                double scale) {
  const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
  std::size_t pos = begin;
  for (const auto& t : k.real_part_terms(1)) {
    const double x = t.z.real(), y = t.z.imag();
    double fact = 1.0;
    for (std::size_t l = 0; l < t.poly.size(); ++l) {
      if (l > 0) fact *= static_cast<double>(l);
      const cplx c = fact * t.poly[l];
      if (y == 0.0) {
        const std::size_t s = pos + l;
        A(idx(s), idx(s)) = x;
        A(idx(s), idx(l == 0 ? field : s - 1)) += 1.0;
        A(idx(row), idx(s)) -= c.real() * scale;
      } else {
        const std::size_t re = pos + 2 * l, im = re + 1;
        A(idx(re), idx(re)) = x;
        A(idx(re), idx(im)) = -y;
        A(idx(im), idx(re)) = y;
        A(idx(im), idx(im)) = x;
        if (l == 0) {
          A(idx(re), idx(field)) += 1.0;
        } else {
          A(idx(re), idx(re - 2)) += 1.0;
          A(idx(im), idx(im - 2)) += 1.0;
        }
        A(idx(row), idx(re)) -= c.real() * scale;
        A(idx(row), idx(im)) += c.imag() * scale;
      }
    }
    pos += t.poly.size() * (y == 0.0 ? 1 : 2);
  }
}

// Parlett-Reinsch diagonal similarity with powers of two.
Eigen::MatrixXd balanced(Eigen::MatrixXd B) {
  const Eigen::Index n = B.rows();
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(B(j, i));
        r += std::abs(B(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c >= g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        B.row(i) /= f;
        B.col(i) *= f;
      }
    }
  }
  return B;
}

ComplexPoly linear(cplx root) { return ComplexPoly{-root, {1.0, 0.0}}; }

// Returns (lambda coef D + nu(0) D + N, D) for L nu' = N / D.
std::pair<ComplexPoly, ComplexPoly> field_factor(const ExpPolyKernel& k, double coef) {
  const auto terms = k.conjugate_closed_terms(1);
  ComplexPoly D = ComplexPoly::constant({1.0, 0.0});
  for (const auto& t : terms) D = D * linear(t.z).pow(static_cast<unsigned>(t.poly.size()));
  ComplexPoly N;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    ComplexPoly others = ComplexPoly::constant({1.0, 0.0});
    for (std::size_t i = 0; i < terms.size(); ++i)
      if (i != j) others = others * linear(terms[i].z).pow(static_cast<unsigned>(terms[i].poly.size()));
    const std::size_t m = terms[j].poly.size();
    double fact = 1.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (l > 0) fact *= static_cast<double>(l);
      N += linear(terms[j].z).pow(static_cast<unsigned>(m - l - 1)) * others * (fact * terms[j].poly[l]);
    }
  }
  const ComplexPoly lam{0.0, coef};
  return {lam * D + D * cplx{k.eval(0.0), 0.0} + N, D};
}

}  // namespace

ModeSystem build_mode(const MediumSpec& medium, double k) {
  medium.validate();
  if (!(k >= 0.0) || !std::isfinite(k)) throw std::invalid_argument("mode wavenumber must be finite and nonnegative");
  const ExpPolyKernel& kE = closed_form(medium.nuE, "electric");
  const ExpPolyKernel& kH = closed_form(medium.nuH, "magnetic");

  ModeSystem s;
  s.k = k;
  s.aux_E_begin = 2;
  s.aux_E_count = memory_size(kE);
  s.aux_H_begin = 2 + s.aux_E_count;
  s.aux_H_count = memory_size(kH);
  const auto n = static_cast<Eigen::Index>(2 + s.aux_E_count + s.aux_H_count);
  s.A = Eigen::MatrixXd::Zero(n, n);
  s.A(0, 0) = -kE.eval(0.0) / medium.eps;
  s.A(0, 1) = k / medium.eps;
  s.A(1, 1) = -kH.eval(0.0) / medium.mu;
  s.A(1, 0) = -k / medium.mu;
  add_memory(s.A, kE, s.e_slot, s.e_slot, s.aux_E_begin, 1.0 / medium.eps);
  add_memory(s.A, kH, s.h_slot, s.h_slot, s.aux_H_begin, 1.0 / medium.mu);
  return s;
}

Eigen::VectorXd initial_state(const ModeSystem& system, double amplitude) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.dim()));
  v(static_cast<Eigen::Index>(system.e_slot)) = amplitude;
  return v;
}

Propagator::Propagator(const Eigen::MatrixXd& A, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  P_ = (A * dt).exp();
  if (!P_.allFinite()) throw NumericError("matrix exponential is not finite");
}

Eigen::VectorXd Propagator::apply(const Eigen::VectorXd& state) const {
  if (state.size() != P_.cols()) throw std::invalid_argument("state dimension does not match the system");
  if (!state.allFinite()) throw NumericError("state is not finite");
  return P_ * state;
}

Eigen::VectorXd step_exact(const ModeSystem& system, const Eigen::VectorXd& state, double dt) {
  return Propagator(system.A, dt).apply(state);
}

Spectrum spectral_abscissa(const ModeSystem& system) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(balanced(system.A), false);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
  Spectrum out;
  out.abscissa = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    out.eigenvalues.push_back(solver.eigenvalues()[i]);
    out.abscissa = std::max(out.abscissa, solver.eigenvalues()[i].real());
  }
  return out;
}

RealPoly characteristic_polynomial(const MediumSpec& medium, double k) {
  medium.validate();
  const auto [fE, dE] = field_factor(closed_form(medium.nuE, "electric"), medium.eps);
  const auto [fH, dH] = field_factor(closed_form(medium.nuH, "magnetic"), medium.mu);
  return real_part(fE * fH + dE * dH * cplx{k * k, 0.0});
}

std::vector<cplx> dispersion_roots(const MediumSpec& medium, double k) {
  return polynomial_roots(characteristic_polynomial(medium, k));
}

// ---------------------------------------------------------------------------

namespace {

// int_a^t of the piecewise-linear interpolant of samples on j dt.
double tail_area(const std::vector<double>& f, double dt, double t, double s) {
  if (s < 0.0) throw std::domain_error("history variable must be nonnegative");
  const double a = t - std::min(s, t);
  auto cumulative = [&](double u) {
    const double pos = u / dt;
    auto m = static_cast<std::size_t>(std::floor(pos));
    if (m >= f.size() - 1) m = f.size() - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += 0.5 * dt * (f[j] + f[j + 1]);
    const double frac = pos - static_cast<double>(m);
    if (frac > 0.0 && m + 1 < f.size()) acc += dt * (frac * f[m] + 0.5 * frac * frac * (f[m + 1] - f[m]));
    return acc;
  };
  return cumulative(t) - cumulative(a);
}

}  // namespace

double HistoryState::eta_E(double s) const { return tail_area(E, dt, t, s); }
double HistoryState::eta_H(double s) const { return tail_area(H, dt, t, s); }

HistoryState make_history(double E0, double H0, double dt, double s_max) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  HistoryState s;
  s.dt = dt;
  s.s_max = s_max;
  s.E = {E0};
  s.H = {H0};
  return s;
}

HistoryIntegrator::HistoryIntegrator(const MediumSpec& medium, double k, double dt, double s_max)
    : eps_(medium.eps), mu_(medium.mu), k_(k), dt_(dt), s_max_(s_max) {
  medium.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(s_max >= dt)) throw std::invalid_argument("history horizon must cover at least one step");
  e0_ = eval(medium.nuE, 0.0, 0);
  h0_ = eval(medium.nuH, 0.0, 0);
  const auto n = static_cast<std::size_t>(std::floor(s_max / dt + 1e-9)) + 2;
  lagE_.resize(n);
  lagE_half_.resize(n);
  lagH_.resize(n);
  lagH_half_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt, th = (static_cast<double>(j) + 0.5) * dt;
    lagE_[j] = eval(medium.nuE, t, 1);
    lagE_half_[j] = eval(medium.nuE, th, 1);
    lagH_[j] = eval(medium.nuH, t, 1);
    lagH_half_[j] = eval(medium.nuH, th, 1);
  }
}

// dt * trapezoid sum_j f_j lag[n - j + shift] over j = 0..n.
double HistoryIntegrator::convolve(const std::vector<double>& f, const std::vector<double>& lag, std::size_t shift) const {
  const std::size_t n = f.size() - 1;
  if (n == 0) return 0.0;
  double acc = 0.5 * (f[0] * lag[n + shift] + f[n] * lag[shift]);
  for (std::size_t j = 1; j < n; ++j) acc += f[j] * lag[n - j + shift];
  return dt_ * acc;
}

void HistoryIntegrator::step(HistoryState& s) const {
  const std::size_t n = s.E.size() - 1;
  const double next = static_cast<double>(n + 1) * dt_;
  if (next > s_max_ * (1.0 + 1e-12))
    throw HistoryTruncation("history horizon exceeded at t = " + std::to_string(next), s_max_);

  const double En = s.E[n], Hn = s.H[n];
  const double pE0 = convolve(s.E, lagE_, 0), pE1 = convolve(s.E, lagE_, 1), pEh = convolve(s.E, lagE_half_, 0);
  const double pH0 = convolve(s.H, lagH_, 0), pH1 = convolve(s.H, lagH_, 1), pHh = convolve(s.H, lagH_half_, 0);

  auto rhs = [&](double E, double H, double cE, double cH) {
    return std::pair{(-e0_ * E - cE + k_ * H) / eps_, (-h0_ * H - cH - k_ * E) / mu_};
  };
  const double h = dt_;
  const auto [a1, b1] = rhs(En, Hn, pE0, pH0);

  double E2 = En + 0.5 * h * a1, H2 = Hn + 0.5 * h * b1;
  const auto [a2, b2] = rhs(E2, H2, pEh + 0.25 * h * (lagE_half_[0] * En + lagE_[0] * E2),
                            pHh + 0.25 * h * (lagH_half_[0] * Hn + lagH_[0] * H2));

  double E3 = En + 0.5 * h * a2, H3 = Hn + 0.5 * h * b2;
  const auto [a3, b3] = rhs(E3, H3, pEh + 0.25 * h * (lagE_half_[0] * En + lagE_[0] * E3),
                            pHh + 0.25 * h * (lagH_half_[0] * Hn + lagH_[0] * H3));

  double E4 = En + h * a3, H4 = Hn + h * b3;
  const auto [a4, b4] = rhs(E4, H4, pE1 + 0.5 * h * (lagE_[1] * En + lagE_[0] * E4),
                            pH1 + 0.5 * h * (lagH_[1] * Hn + lagH_[0] * H4));

  const double En1 = En + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  const double Hn1 = Hn + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
  if (!std::isfinite(En1) || !std::isfinite(Hn1)) throw NumericError("history integration produced non-finite fields");
  s.E.push_back(En1);
  s.H.push_back(Hn1);
  s.t = next;
}

HistoryState step_history(const MediumSpec& medium, double k, const HistoryState& state, double dt) {
  if (std::abs(dt - state.dt) > 1e-12 * state.dt) throw std::invalid_argument("step size differs from the history grid");
  HistoryState out = state;
  HistoryIntegrator(medium, k, dt, state.s_max).step(out);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Mode> cavity_modes(const MediumSpec& medium, double length, int n_max, double amplitude_power) {
  medium.validate();
  if (!(length > 0.0)) throw std::invalid_argument("cavity length must be positive");
  if (n_max < 0) throw std::invalid_argument("mode count must be nonnegative");
  const double c0 = 1.0 / std::sqrt(medium.eps * medium.mu);
  std::vector<Mode> modes;
  for (int n = 1; n <= n_max; ++n)
    modes.push_back({n * std::numbers::pi * c0 / length, std::pow(static_cast<double>(n), -amplitude_power)});
  return modes;
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += v[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

DecayBound default_history_weight(const MediumSpec& medium) {
  bool any = false;
  DecayBound w{0.0, std::numeric_limits<double>::infinity()};
  for (const Kernel* k : {&medium.nuE, &medium.nuH}) {
    if (const auto* e = std::get_if<ExpPolyKernel>(k); e != nullptr && e->terms().empty()) continue;
    const auto cert = certify_class_K(*k);
    w.C = std::max(w.C, cert.C);
    w.delta = std::min(w.delta, cert.delta);
    any = true;
  }
  return any ? w : DecayBound{1.0, 1.0};
}

EnergyTrace run_multimode(const MediumSpec& medium, const std::vector<Mode>& modes, const RunOptions& opt) {
  medium.validate();
  if (!(opt.dt > 0.0) || !std::isfinite(opt.dt)) throw std::invalid_argument("time step must be positive");
  if (!(opt.T >= opt.dt) || !std::isfinite(opt.T)) throw std::invalid_argument("final time must be at least one step");
  if (opt.output_stride == 0) throw std::invalid_argument("output stride must be positive");
  const double ratio = opt.T / opt.dt;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio)
    throw std::invalid_argument("final time must be a whole number of steps");

  EnergyTrace trace;
  if (modes.empty()) return trace;
  for (const auto& m : modes)
    if (!std::isfinite(m.amplitude)) throw std::invalid_argument("mode amplitude must be finite");

  const DecayBound w = opt.weight ? *opt.weight : default_history_weight(medium);
  const std::size_t samples = steps / opt.output_stride + 1;
  for (std::size_t s = 0; s < samples; ++s) trace.times.push_back(static_cast<double>(s * opt.output_stride) * opt.dt);

  const std::size_t M = modes.size();
  std::vector<std::vector<double>> energy(M), history(M);
  std::vector<std::exception_ptr> errors(M);

  auto run_mode = [&](std::size_t i) {
    const ModeSystem sys = build_mode(medium, modes[i].k);
    const auto n = static_cast<Eigen::Index>(sys.dim());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 2, n + 2);
    A.topLeftCorner(n, n) = sys.A;
    // Weighted history moments: Phi' = -delta Phi + field / delta.
    A(n, n) = -w.delta;
    A(n, 0) = 1.0 / w.delta;
    A(n + 1, n + 1) = -w.delta;
    A(n + 1, 1) = 1.0 / w.delta;
    const Propagator P(A, opt.dt);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 2);
    x(0) = modes[i].amplitude;
    const double decay = std::exp(-w.delta * opt.dt);
    double psiE = 0.0, psiH = 0.0;
    auto& en = energy[i];
    auto& hn = history[i];
    en.reserve(samples);
    hn.reserve(samples);
    auto record = [&] {
      en.push_back(0.5 * (medium.eps * x(0) * x(0) + medium.mu * x(1) * x(1)));
      hn.push_back(0.5 * w.C * (psiE + psiH));
    };
    record();
    for (std::size_t step = 1; step <= steps; ++step) {
      const double gE = 2.0 * x(0) * x(n), gH = 2.0 * x(1) * x(n + 1);
      x = P.apply(x);
      psiE = decay * psiE + 0.5 * opt.dt * (decay * gE + 2.0 * x(0) * x(n));
      psiH = decay * psiH + 0.5 * opt.dt * (decay * gH + 2.0 * x(1) * x(n + 1));
      if (step % opt.output_stride == 0) record();
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(M)));
  log_info("running %zu modes, %zu steps, %u threads", M, steps, threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < M; i = next++) {
      try {
        run_mode(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> column(M);
  trace.energy.resize(samples);
  trace.history_norm.resize(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < M; ++i) column[i] = energy[i][s];
    trace.energy[s] = pairwise_sum(column.data(), M);
    for (std::size_t i = 0; i < M; ++i) column[i] = history[i][s];
    trace.history_norm[s] = pairwise_sum(column.data(), M);
  }
  return trace;
}

}  // namespace dispersia
