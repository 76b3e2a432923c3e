#include <catch_amalgamated.hpp>

#include <numbers>

#include "dispersia/errors.hpp"
#include "dispersia/modal.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace dispersia;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using cplx = std::complex<double>;

namespace {

MediumSpec medium(Kernel E, Kernel H = ExpPolyKernel{}) {
  MediumSpec m;
  m.nuE = std::move(E);
  m.nuH = std::move(H);
  return m;
}

const MediumSpec debye = medium(ExpPolyKernel::debye(1, 1));
const MediumSpec lorentz = medium(ExpPolyKernel::lorentz(1, 1, 1));
const MediumSpec drude = medium(ExpPolyKernel::drude(1, 1));
const MediumSpec vacuum = medium(ExpPolyKernel{});

double energy(const MediumSpec& m, double E, double H) { return 0.5 * (m.eps * E * E + m.mu * H * H); }

}  // namespace

TEST_CASE("Debye mode matrix and characteristic polynomial") {
  const auto sys = build_mode(debye, 1.0);
  REQUIRE(sys.dim() == 3);
  Eigen::Matrix3d expected;
  expected << -1, 1, 1, -1, 0, 0, 1, 0, -1;
  CHECK((sys.A - expected).norm() < 1e-15);
  CHECK(sys.aux_E_count == 1);
  CHECK(sys.aux_H_count == 0);

  const RealPoly p = characteristic_polynomial(debye, 1.0);
  const RealPoly monic = p * (1.0 / p.leading());
  for (int i = 0; i < 4; ++i) CHECK_THAT(monic[i], WithinAbs(RealPoly{1, 1, 2, 1}[i], 1e-14));

  // independent char poly of the matrix
  Eigen::EigenSolver<Eigen::Matrix3d> es(expected);
  for (auto r : dispersion_roots(debye, 1.0)) {
    double best = INFINITY;
    for (int i = 0; i < 3; ++i) best = std::min(best, std::abs(r - es.eigenvalues()(i)));
    CHECK(best < 1e-12);
  }
}

TEST_CASE("vacuum modes") {
  const auto s0 = build_mode(vacuum, 0.0);
  REQUIRE(s0.dim() == 2);
  CHECK(s0.A.isZero());
  Eigen::VectorXd u(2);
  u << 0.3, -2.0;
  CHECK((step_exact(s0, u, 1.0) - u).norm() == 0.0);

  const auto s1 = build_mode(vacuum, 1.0);
  const auto sp = spectral_abscissa(s1);
  CHECK_THAT(sp.abscissa, WithinAbs(0.0, 1e-14));
  for (auto l : sp.eigenvalues) CHECK_THAT(std::abs(l.imag()), WithinAbs(1.0, 1e-14));

  const Eigen::VectorXd back = step_exact(s1, initial_state(s1, 1.0), 2 * std::numbers::pi);
  CHECK_THAT(back(0), WithinAbs(1.0, 1e-10));
  CHECK_THAT(back(1), WithinAbs(0.0, 1e-10));

  MediumSpec slow = vacuum;
  slow.eps = 4.0;
  for (auto r : dispersion_roots(slow, 3.0)) CHECK_THAT(std::abs(r), WithinRel(1.5, 1e-12));
}

TEST_CASE("Debye abscissa") {
  CHECK_THAT(spectral_abscissa(build_mode(debye, 1.0)).abscissa, WithinAbs(testkit::kDebyePairRe, 1e-12));
  const auto sp = spectral_abscissa(build_mode(debye, 100.0));
  double root_max = -INFINITY;
  for (auto r : dispersion_roots(debye, 100.0)) root_max = std::max(root_max, r.real());
  CHECK_THAT(sp.abscissa, WithinAbs(root_max, 1e-6));
  CHECK(sp.abscissa < -0.49);
}

TEST_CASE("Lorentz abscissa matches the dispersion roots and an independent matrix") {
  const auto sp = spectral_abscissa(build_mode(lorentz, 10.0));
  double root_max = -INFINITY;
  for (auto r : dispersion_roots(lorentz, 10.0)) root_max = std::max(root_max, r.real());
  CHECK_THAT(sp.abscissa, WithinAbs(root_max, 1e-8));
  for (const auto& [k, scaled] : testkit::lorentz_scaled_abscissa_frozen())
    CHECK_THAT(spectral_abscissa(build_mode(lorentz, k)).abscissa * k * k, WithinRel(scaled, 1e-6));
}

TEST_CASE("Drude closure has no spurious zero mode") {
  const auto sys = build_mode(drude, 2.0);
  CHECK(sys.dim() == 3);
  const auto sp = spectral_abscissa(sys);
  CHECK(sp.abscissa < 0);
  for (auto l : sp.eigenvalues) CHECK(std::abs(l) > 1e-3);
}

TEST_CASE("dispersion roots are eigenvalues for random media") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const auto m = testkit::random_strictly_passive_medium(rng);
    for (double k : {1.0, 10.0}) {
      const auto sp = spectral_abscissa(build_mode(m, k));
      const auto roots = dispersion_roots(m, k);
      CHECK(roots.size() <= sp.eigenvalues.size());
      for (auto r : roots) {
        double best = INFINITY;
        for (auto l : sp.eigenvalues) best = std::min(best, std::abs(r - l));
        CHECK(best <= 1e-8 * std::max(1.0, std::abs(r)));
      }
      CHECK(sp.abscissa < 0);
    }
  }
}

TEST_CASE("sampled kernels have no finite closure") {
  const auto m = medium(SampledKernel::builtin("gaussian", {3.5, 1}));
  CHECK_THROWS_AS(build_mode(m, 1.0), Unsupported);
  MediumSpec bad = debye;
  bad.eps = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("stored history in the lossless case conserves energy") {
  const double dt = 0.01;
  HistoryIntegrator integ(vacuum, 1.0, dt, 10.0);
  auto s = make_history(1.0, 0.0, dt, 10.0);
  for (int i = 0; i < 1000; ++i) integ.step(s);
  CHECK_THAT(energy(vacuum, s.e(), s.h()), WithinAbs(0.5, 1e-8));
  CHECK_THAT(s.e(), WithinAbs(std::cos(10.0), 1e-8));
  CHECK_THROWS_AS(integ.step(s), HistoryTruncation);
}

TEST_CASE("summed past histories") {
  auto s = make_history(1.0, 2.0, 0.1, 1.0);
  s.E = std::vector<double>(11, 1.0);
  s.H = std::vector<double>(11, 2.0);
  s.t = 1.0;
  CHECK(s.eta_E(0.0) == 0.0);
  CHECK_THAT(s.eta_E(0.35), WithinAbs(0.35, 1e-14));
  CHECK_THAT(s.eta_E(5.0), WithinAbs(1.0, 1e-14));
  CHECK_THAT(s.eta_H(0.5), WithinAbs(1.0, 1e-14));
}

TEST_CASE("eigenpairs reconstruct a history that solves the transport relation") {
  const auto sys = build_mode(debye, 1.0);
  Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A);
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx l = es.eigenvalues()(i);
    const cplx E = es.eigenvectors()(0, i);
    for (double s : {0.0, 0.5, 2.0, 7.0}) {
      const cplx eta = (1.0 - std::exp(-l * s)) / l * E;
      const cplx deta = std::exp(-l * s) * E;
      CHECK(std::abs(l * eta + deta - E) <= 1e-13 * std::abs(E) * std::max(1.0, std::abs(std::exp(-l * s))));
    }
  }
}

TEST_CASE("stored history agrees with the exact closure") {
  auto relative_error = [](double dt) {
    HistoryIntegrator integ(debye, 1.0, dt, 10.0);
    auto s = make_history(1.0, 0.0, dt, 10.0);
    const auto n = static_cast<int>(std::llround(10.0 / dt));
    for (int i = 0; i < n; ++i) integ.step(s);
    const auto sys = build_mode(debye, 1.0);
    const Eigen::VectorXd x = step_exact(sys, initial_state(sys, 1.0), 10.0);
    return std::hypot(s.e() - x(0), s.h() - x(1)) / std::hypot(x(0), x(1));
  };
  const double e1 = relative_error(0.01);
  const double e2 = relative_error(0.005);
  CHECK(e1 <= 1e-4);
  CHECK(e1 / e2 >= 3.5);

  // step_exact composes
  const auto sys = build_mode(debye, 1.0);
  Eigen::VectorXd x = initial_state(sys, 1.0);
  const Propagator P(sys.A, 0.1);
  for (int i = 0; i < 100; ++i) x = P.apply(x);
  CHECK((x - step_exact(sys, initial_state(sys, 1.0), 10.0)).norm() <= 1e-12);

  // one-shot step helper matches the integrator
  auto a = make_history(1.0, 0.0, 0.01, 1.0);
  const auto b = step_history(debye, 1.0, a, 0.01);
  HistoryIntegrator(debye, 1.0, 0.01, 1.0).step(a);
  CHECK(a.e() == b.e());
}

TEST_CASE("Gaussian stored history is dissipative") {
  const auto m = medium(SampledKernel::builtin("gaussian", {3.5, 1}));
  const double dt = 1e-3;
  HistoryIntegrator integ(m, 1.0, dt, 10.0);
  auto s = make_history(1.0, 0.0, dt, 10.0);
  const double e0 = energy(m, 1.0, 0.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    integ.step(s);
    worst = std::max(worst, energy(m, s.e(), s.h()) / e0);
  }
  CHECK(worst <= 1.0 + 1e-10);
  CHECK(energy(m, s.e(), s.h()) < 0.5 * e0);
}

TEST_CASE("multimode runs") {
  SECTION("zero amplitudes give zero energy") {
    RunOptions o{0.1, 5.0, 1, 1, std::nullopt};
    const auto tr = run_multimode(debye, {{1.0, 0.0}, {2.0, 0.0}}, o);
    REQUIRE(tr.times.size() == 51);
    for (double e : tr.energy) CHECK(e == 0.0);
    for (double h : tr.history_norm) CHECK(h == 0.0);
  }
  SECTION("energy is bounded by its initial value") {
    const auto modes = cavity_modes(lorentz, 1.0, 20);
    RunOptions o{0.05, 20.0, 2, 1, std::nullopt};
    const auto tr = run_multimode(lorentz, modes, o);
    for (double e : tr.energy) CHECK(e <= tr.energy[0] * (1 + 1e-10));
    CHECK(tr.times.back() == 20.0);
  }
  SECTION("thread count does not change a single bit") {
    const auto modes = cavity_modes(drude, 1.0, 37);
    RunOptions o{0.05, 10.0, 1, 1, std::nullopt};
    const auto a = run_multimode(drude, modes, o);
    o.threads = 4;
    const auto b = run_multimode(drude, modes, o);
    CHECK(a.energy == b.energy);
    CHECK(a.history_norm == b.history_norm);
  }
  SECTION("bad options") {
    CHECK_THROWS_AS(run_multimode(debye, {{1, 1}}, RunOptions{0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(run_multimode(debye, {{1, 1}}, RunOptions{0.3, 1.0}), std::invalid_argument);
  }
}

TEST_CASE("cavity modes") {
  MediumSpec m = vacuum;
  m.eps = 4.0;
  const auto modes = cavity_modes(m, 2.0, 3, 1.5);
  REQUIRE(modes.size() == 3);
  CHECK_THAT(modes[2].k, WithinRel(3 * std::numbers::pi * 0.5 / 2.0, 1e-15));
  CHECK_THAT(modes[1].amplitude, WithinRel(std::pow(2.0, -1.5), 1e-15));
}

TEST_CASE("history norm equals the weighted integral of the summed past histories") {
  // states on a fine grid from the exact closure, eta by the stored-history formula
  const DecayBound w{1.05, 0.9};
  const double dt = 1e-3, T = 5.0;
  const auto sys = build_mode(debye, 1.0);
  const Propagator P(sys.A, dt);
  HistoryState h = make_history(1.0, 0.0, dt, T);
  Eigen::VectorXd x = initial_state(sys, 1.0);
  const int n = static_cast<int>(std::llround(T / dt));
  for (int i = 0; i < n; ++i) {
    x = P.apply(x);
    h.E.push_back(x(0));
    h.H.push_back(x(1));
  }
  h.t = T;
  auto integrand = [&](double s) {
    const double e = h.eta_E(s), m = h.eta_H(s);
    return w.C * std::exp(-w.delta * s) * (e * e + m * m);
  };
  const double inner = testkit::simpson(integrand, 0.0, T, 2000);
  const double eE = h.eta_E(T), eH = h.eta_H(T);
  const double tail = w.C * (eE * eE + eH * eH) * std::exp(-w.delta * T) / w.delta;
  const double expected = 0.5 * (inner + tail);

  RunOptions o{dt, T, 1000, 1, w};
  const auto tr = run_multimode(debye, {{1.0, 1.0}}, o);
  CHECK_THAT(tr.history_norm.back(), WithinRel(expected, 1e-5));
  CHECK_THAT(tr.energy.back(), WithinRel(energy(debye, x(0), x(1)), 1e-12));
}

TEST_CASE("pairwise sum") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (i + 1.0);
  long double ref = 0;
  for (double d : v) ref += d;
  CHECK_THAT(pairwise_sum(v.data(), v.size()), WithinRel(double(ref), 1e-15));
  CHECK(pairwise_sum(v.data(), 0) == 0.0);
}
