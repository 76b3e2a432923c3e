#include <catch_amalgamated.hpp>

#include <numbers>

#include "dispersia/errors.hpp"
#include "dispersia/kernel.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace dispersia;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using cplx = std::complex<double>;

namespace {

const ExpPolyKernel debye = ExpPolyKernel::debye(1, 1);
const ExpPolyKernel lorentz = ExpPolyKernel::lorentz(1, 1, 1);
const ExpPolyKernel drude = ExpPolyKernel::drude(1, 1);

std::vector<ExpPolyKernel> kernel_zoo() {
  std::vector<ExpPolyKernel> zoo{debye, lorentz, drude};
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10; ++i) zoo.push_back(testkit::random_exp_poly(rng));
  return zoo;
}

}  // namespace

TEST_CASE("named kernels evaluate to their closed forms") {
  CHECK(debye.eval(0.0) == 1.0);
  CHECK_THAT(lorentz.eval(0.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(drude.eval(0.0, 1), WithinAbs(1.0, 1e-15));
  for (double t : {0.3, 1.0, 4.0}) {
    CHECK_THAT(debye.eval(t), WithinRel(std::exp(-t), 1e-14));
    CHECK_THAT(lorentz.eval(t), WithinAbs(std::sin(t) * std::exp(-t / 2), 1e-15));
    CHECK_THAT(drude.eval(t), WithinAbs(1 - std::exp(-t), 1e-15));
    CHECK_THAT(lorentz.eval(t, 2), WithinAbs(std::exp(-t / 2) * (-0.75 * std::sin(t) - std::cos(t)), 1e-14));
  }
  CHECK(drude.asymptotic_value() == 1.0);
  CHECK(ExpPolyKernel{}.is_zero());
  CHECK(ExpPolyKernel::zero().eval(3.0, 2) == 0.0);
}

TEST_CASE("negative times and bad orders are rejected") {
  CHECK_THROWS_AS(debye.eval(-1e-12), std::domain_error);
  CHECK_THROWS_AS(eval(Kernel{debye}, 1.0, 3), std::domain_error);
  const auto g = SampledKernel::builtin("gaussian", {3.5, 1});
  CHECK_THROWS_AS(g.eval(-1.0), std::domain_error);
}

TEST_CASE("derivatives agree with central differences") {
  for (const auto& k : kernel_zoo()) {
    for (double t : {0.5, 1.7, 3.0}) {
      const double h = 1e-5;
      for (int order : {1, 2}) {
        const double fd = (k.eval(t + h, order - 1) - k.eval(t - h, order - 1)) / (2 * h);
        CHECK_THAT(k.eval(t, order), WithinAbs(fd, 1e-6 * (1 + std::abs(fd))));
      }
    }
  }
}

TEST_CASE("conjugate pairs fold to the real form") {
  // sin(t) e^{-t/2} = Re(-i e^{(-1/2 + i) t}) = (-i/2) e^{z t} + (i/2) e^{conj(z) t}
  const cplx z(-0.5, 1.0);
  const auto k = ExpPolyKernel::from_terms({{ComplexPoly{cplx(0, -0.5)}, z}, {ComplexPoly{cplx(0, 0.5)}, std::conj(z)}});
  for (double t : {0.0, 0.4, 2.5}) CHECK_THAT(k.eval(t), WithinAbs(lorentz.eval(t), 1e-15));

  const auto terms = k.conjugate_closed_terms();
  REQUIRE(terms.size() == 2);
  const auto back = ExpPolyKernel::from_terms(terms);
  for (double t : {0.1, 1.0}) CHECK_THAT(back.eval(t, 2), WithinAbs(k.eval(t, 2), 1e-15));
}

TEST_CASE("unpaired complex terms are not real-valued") {
  const cplx z(-0.5, 1.0);
  CHECK_THROWS_AS(ExpPolyKernel::from_terms({{ComplexPoly{cplx(1, 0)}, z}}), KernelError);
  CHECK_THROWS_AS(ExpPolyKernel::from_terms({{ComplexPoly{cplx(0, 1)}, cplx(-1, 0)}}), KernelError);
  CHECK_THROWS_AS(ExpPolyKernel::from_real_terms({RealTerm{RealPoly{NAN}, {}, -1, 0}}), KernelError);
}

TEST_CASE("Debye certificate") {
  const auto c = certify_class_K(debye);
  CHECK_THAT(c.delta, WithinRel(0.9, 1e-14));
  CHECK_THAT(c.C, WithinRel(1.05, 1e-12));
  CHECK(c.max_violation <= 0.0);
  CHECK(c.checked_horizon >= 20.0 / 0.9 - 1e-12);
}

TEST_CASE("certificates hold on an independent dense grid") {
  for (const auto& k : kernel_zoo()) {
    const auto c = certify_class_K(k);
    const auto [worst, at] = testkit::grid_max(
        [&](double t) { return std::abs(k.eval(t, 2)) - c.weight(t); }, 0.0, 60.0 / c.delta, 200000);
    INFO("worst violation at t = " << at);
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("growing terms are outside the class") {
  const auto k = ExpPolyKernel::from_real_terms({RealTerm{RealPoly{1.0}, {}, 0.1, 0.0}});
  CHECK_THROWS_AS(certify_class_K(k), NotInClassK);
  const auto undamped = ExpPolyKernel::from_real_terms({RealTerm{{}, RealPoly{1.0}, 0.0, 1.0}});
  CHECK_THROWS_AS(certify_class_K(undamped), NotInClassK);
}

TEST_CASE("Gaussian declared bounds") {
  // independent dense-grid maximum of |nu''| e^{t}
  const auto [m, at] =
      testkit::grid_max([](double t) { return std::abs((4 * t * t - 2) * std::exp(-t * t)) * std::exp(t); }, 0, 10, 1000000);
  CHECK_THAT(m, WithinRel(testkit::kGaussianBoundMax, 1e-9));
  CHECK_THAT(at, WithinAbs(testkit::kGaussianBoundArgmax, 1e-4));

  const auto weak = SampledKernel::builtin("gaussian", {2.1, 1.0});
  try {
    certify_class_K(weak);
    FAIL("(2.1, 1) should not certify");
  } catch (const CertificationFailure& e) {
    const auto [excess, worst_t] = testkit::grid_max(
        [](double t) { return std::abs((4 * t * t - 2) * std::exp(-t * t)) - 2.1 * std::exp(-t); }, 0, 10, 1000000);
    CHECK(excess > 0);
    CHECK_THAT(e.violating_t(), WithinAbs(worst_t, 0.01));
  }
  const auto ok = certify_class_K(SampledKernel::builtin("gaussian", {3.5, 1.0}));
  CHECK(ok.max_violation <= 0.0);
  CHECK(ok.checked_horizon == 50.0);
  CHECK_THROWS_AS(SampledKernel::builtin("lognormal", {1, 1}), KernelError);
  CHECK_THROWS_AS(SampledKernel::builtin("gaussian", {-1, 1}), KernelError);
}

TEST_CASE("closed-form Laplace transforms") {
  CHECK_THAT(debye.laplace(1.0).real(), WithinAbs(0.5, 1e-15));
  CHECK_THAT(drude.laplace(1.0).real(), WithinAbs(0.5, 1e-15));
  const cplx l(0.3, 2.0);
  CHECK(std::abs(lorentz.laplace(l) - 1.0 / ((l + 0.5) * (l + 0.5) + 1.0)) < 1e-15);
  CHECK_THROWS_AS(drude.laplace(0.0), UnsupportedPoint);
}

TEST_CASE("Gaussian response on the imaginary axis") {
  const Kernel g = SampledKernel::builtin("gaussian", {3.5, 1.0});
  const double e = std::exp(-1.0);
  const cplx expected = e * cplx(2 * testkit::kI2, std::sqrt(std::numbers::pi));
  CHECK(std::abs(omega_response(g, 2.0) - expected) < 1e-9);

  const auto& s = std::get<SampledKernel>(g);
  for (const auto& [w, v] : testkit::gaussian_response_frozen()) {
    INFO("omega = " << w);
    CHECK(std::abs(omega_response(g, w) - v) < 1e-9);
    CHECK(std::abs(s.fast_response(w) - v) < 1e-12);
    CHECK(std::abs(testkit::gaussian_response(w) - v) < 1e-9);
  }
}

TEST_CASE("closed form and quadrature agree on the right half-plane") {
  std::mt19937_64 rng(5);
  for (const auto& k : kernel_zoo()) {
    const auto wrapped = SampledKernel::wrap(k, certify_class_K(k).bound());
    for (int i = 0; i < 100; ++i) {
      const cplx l(testkit::uniform(rng, 0, 5), testkit::uniform(rng, -10, 10));
      const cplx cf = k.laplace(l);
      const cplx q = laplace_quadrature(wrapped, l);
      INFO("lambda = " << l);
      CHECK(std::abs(cf - q) <= 1e-8 * (1 + std::abs(cf)));
    }
  }
}

TEST_CASE("lambda L nu - nu(0) = L nu'") {
  std::mt19937_64 rng(6);
  for (const auto& k : kernel_zoo()) {
    const auto bound = certify_class_K(k).bound();
    for (int i = 0; i < 20; ++i) {
      const cplx l(testkit::uniform(rng, 0, 3), testkit::uniform(rng, -8, 8));
      const cplx r = l * k.laplace(l) - k.eval(0) - laplace_of_derivative_quadrature(Kernel{k}, 1, l, bound);
      CHECK(std::abs(r) <= 1e-9);
    }
  }
}

TEST_CASE("nu'(t) is minus the tail integral of nu''") {
  for (const auto& k : kernel_zoo()) {
    const auto bound = certify_class_K(k).bound();
    for (double t : {0.0, 1.0, 10.0}) CHECK(std::abs(k.eval(t, 1) + tail_integral_second_derivative(k, t, bound)) <= 1e-9);
  }
  const Kernel g = SampledKernel::builtin("gaussian", {3.5, 1.0});
  for (double t : {0.0, 1.0, 10.0})
    CHECK(std::abs(eval(g, t, 1) + tail_integral_second_derivative(g, t, {3.5, 1.0})) <= 1e-9);
}

TEST_CASE("Laplace transform vanishes far to the right") {
  for (const auto& k : {debye, lorentz, drude}) CHECK(std::abs(k.laplace(cplx(1e6, 3.0))) <= 1e-6);
  // in general L nu(lambda) ~ nu(0) / lambda
  for (const auto& k : kernel_zoo()) {
    const cplx l(1e6, 3.0);
    CHECK(std::abs(l * k.laplace(l) - k.eval(0)) <= 1e-4 * (1 + std::abs(k.eval(0, 1))));
  }
  const auto g = SampledKernel::builtin("gaussian", {3.5, 1.0});
  CHECK(std::abs(laplace_quadrature(g, cplx(1e6, 0.0))) <= 1e-6);
}

TEST_CASE("quadrature Laplace is undefined at the origin") {
  const auto g = SampledKernel::builtin("gaussian", {3.5, 1.0});
  CHECK_THROWS_AS(laplace_quadrature(g, 0.0), UnsupportedPoint);
  CHECK_THROWS_AS(laplace_quadrature(g, cplx(-0.1, 1.0)), UnsupportedPoint);
  // the omega = 0 limit of i omega L nu is nu(infinity)
  CHECK(std::abs(omega_response(Kernel{g}, 0.0)) < 1e-12);
  CHECK(std::abs(omega_response(Kernel{drude}, 0.0) - 1.0) < 1e-14);
}

TEST_CASE("sampled exponential matches Debye") {
  const auto s = SampledKernel::builtin("exponential", {1.05, 0.9});
  for (double w : {0.1, 1.0, 7.0}) {
    const cplx q = cplx(0, w) * laplace_quadrature(s, cplx(0, w));
    CHECK(std::abs(q - omega_response(Kernel{debye}, w)) < 1e-9);
    CHECK(std::abs(s.fast_response(w) - q) < 1e-9);
  }
}
