#include <catch_amalgamated.hpp>

#include <algorithm>

#include "dispersia/polynomial.hpp"
#include "dispersia/roots.hpp"
#include "oracles.hpp"

using namespace dispersia;
using Catch::Matchers::WithinAbs;

TEST_CASE("polynomial arithmetic keeps trimmed coefficients") {
  const RealPoly p{1, 2, 3};
  const RealPoly q{-1, -2, -3};
  CHECK((p + q).is_zero());
  CHECK((p + q).degree() == -1);
  CHECK((p * RealPoly{0, 1}) == RealPoly{0, 1, 2, 3});
  CHECK(p.derivative() == RealPoly{2, 6});
  CHECK(p(2.0) == 17.0);
  CHECK(RealPoly::monomial(3, 2.0) == RealPoly{0, 0, 0, 2});
  CHECK(RealPoly{1, 1}.pow(3) == RealPoly{1, 3, 3, 1});
}

TEST_CASE("divmod reconstructs the dividend") {
  const RealPoly a{5, -3, 0, 2, 1};
  const RealPoly d{1, 0, 1};
  const auto [q, r] = a.divmod(d);
  CHECK(r.degree() < d.degree());
  const RealPoly back = q * d + r;
  for (int i = 0; i <= a.degree(); ++i) CHECK_THAT(back[i], WithinAbs(a[i], 1e-14));
  CHECK_THROWS_AS(a.divmod(RealPoly{}), std::domain_error);
}

TEST_CASE("complex helpers split and conjugate coefficients") {
  const ComplexPoly p{{1, 2}, {3, -4}};
  CHECK(real_part(p) == RealPoly{1, 3});
  CHECK(imag_part(p) == RealPoly{2, -4});
  const std::complex<double> x(0.7, 0.0);
  CHECK(std::abs(conj_coeffs(p)(x) - std::conj(p(x))) < 1e-15);
  CHECK(abs_coeffs(p) == RealPoly{std::sqrt(5.0), 5.0});
}

TEST_CASE("roots of the Debye dispersion cubic") {
  auto roots = polynomial_roots(RealPoly{1, 1, 2, 1});
  REQUIRE(roots.size() == 3);
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) { return a.real() < b.real(); });
  CHECK_THAT(roots[0].real(), WithinAbs(testkit::kDebyeRealRoot, 1e-14));
  CHECK_THAT(std::abs(roots[0].imag()), WithinAbs(0.0, 1e-14));
  CHECK_THAT(roots[1].real(), WithinAbs(testkit::kDebyePairRe, 1e-14));
  CHECK_THAT(std::abs(roots[1].imag()), WithinAbs(testkit::kDebyePairIm, 1e-14));
}

TEST_CASE("exact zero roots are split off") {
  const auto roots = polynomial_roots(RealPoly{0, 0, -1, 1});
  REQUIRE(roots.size() == 3);
  int zeros = 0;
  for (auto r : roots) zeros += r == std::complex<double>(0.0);
  CHECK(zeros == 2);
}

TEST_CASE("sign profile decides nonnegativity without sampling") {
  SECTION("omega^2 touches zero at the origin") {
    const auto s = sign_profile(RealPoly{0, 0, 1}, SignDomain::whole_line);
    CHECK(s.nonnegative());
    CHECK(s.positive_off_zero());
  }
  SECTION("-omega^2 is negative") {
    const auto s = sign_profile(RealPoly{0, 0, -1}, SignDomain::whole_line);
    CHECK_FALSE(s.nonnegative());
  }
  SECTION("(omega^2 - 1)^2 has double roots that do not cross") {
    const auto s = sign_profile(RealPoly{-1, 0, 1}.pow(2), SignDomain::half_line);
    CHECK(s.nonnegative());
    CHECK_FALSE(s.positive_off_zero());
    REQUIRE(s.real_roots.size() >= 1);
    CHECK_THAT(s.real_roots.back(), WithinAbs(1.0, 1e-7));
  }
  SECTION("a narrow dip between grid points is found") {
    // (omega - 3)^2 - 1e-6 is negative only on (3 - 1e-3, 3 + 1e-3)
    const auto s = sign_profile(RealPoly{9 - 1e-6, -6, 1}, SignDomain::half_line);
    CHECK_FALSE(s.nonnegative());
    REQUIRE(s.negative_at.size() == 1);
    CHECK_THAT(s.negative_at[0], WithinAbs(3.0, 1e-3));
  }
  SECTION("positive polynomial") {
    const auto s = sign_profile(RealPoly{1, 0, 1}, SignDomain::whole_line);
    CHECK(s.positive_off_zero());
    CHECK(s.real_roots.empty());
  }
  SECTION("zero polynomial") {
    const auto s = sign_profile(RealPoly{}, SignDomain::whole_line);
    CHECK(s.identically_zero);
    CHECK(s.nonnegative());
    CHECK_FALSE(s.positive_off_zero());
  }
  SECTION("odd polynomial changes sign on the whole line") {
    const auto s = sign_profile(RealPoly{0, 1}, SignDomain::whole_line);
    CHECK_FALSE(s.nonnegative());
    CHECK(sign_profile(RealPoly{0, 1}, SignDomain::half_line).nonnegative());
  }
}
