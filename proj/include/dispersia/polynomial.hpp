#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace dispersia {

/// Dense univariate polynomial with coefficients stored in ascending degree.
///
/// The zero polynomial has an empty coefficient list and degree -1. All
/// arithmetic keeps the representation trimmed of exact trailing zeros;
/// tolerance-based trimming is explicit (see trimmed()).
template <typename T>
class Polynomial {
 public:
  using value_type = T;

  Polynomial() = default;
  Polynomial(std::initializer_list<T> coeffs) : coeffs_(coeffs) { normalize(); }
  explicit Polynomial(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

  static Polynomial constant(T c) { return Polynomial(std::vector<T>{c}); }
  static Polynomial monomial(std::size_t degree, T c = T{1}) {
    std::vector<T> v(degree + 1, T{});
    v[degree] = c;
    return Polynomial(std::move(v));
  }

  [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] const std::vector<T>& coeffs() const { return coeffs_; }
  [[nodiscard]] std::size_t size() const { return coeffs_.size(); }

  [[nodiscard]] T operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : T{}; }
  [[nodiscard]] T leading() const { return coeffs_.empty() ? T{} : coeffs_.back(); }

  /// Horner evaluation; the argument type may be wider than T (real poly at a complex point).
  template <typename U>
  [[nodiscard]] auto operator()(const U& x) const {
    using R = decltype(std::declval<T>() * std::declval<U>());
    R acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + R(*it);
    return acc;
  }

  [[nodiscard]] Polynomial derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<T> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
  }

  /// Drops trailing coefficients with |c| <= tol. Use for cancellation cleanup.
  [[nodiscard]] Polynomial trimmed(double tol) const {
    std::vector<T> v = coeffs_;
    while (!v.empty() && std::abs(v.back()) <= tol) v.pop_back();
    return Polynomial(std::move(v));
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), T{});
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    normalize();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), T{});
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    normalize();
    return *this;
  }
  Polynomial& operator*=(T s) {
    for (auto& c : coeffs_) c *= s;
    normalize();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= T{-1}; }
  friend Polynomial operator*(Polynomial a, T s) { return a *= s; }
  friend Polynomial operator*(T s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> r(a.coeffs_.size() + b.coeffs_.size() - 1, T{});
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) r[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(r));
  }

  [[nodiscard]] Polynomial pow(unsigned n) const {
    Polynomial r = constant(T{1});
    for (unsigned i = 0; i < n; ++i) r = r * *this;
    return r;
  }

  /// Euclidean division; returns (quotient, remainder).
  [[nodiscard]] std::pair<Polynomial, Polynomial> divmod(const Polynomial& d) const {
    if (d.is_zero()) throw std::domain_error("polynomial division by zero");
    if (degree() < d.degree()) return {Polynomial{}, *this};
    std::vector<T> rem = coeffs_;
    std::vector<T> q(coeffs_.size() - d.coeffs_.size() + 1, T{});
    const T lead = d.leading();
    for (int k = static_cast<int>(q.size()) - 1; k >= 0; --k) {
      const T f = rem[static_cast<std::size_t>(k) + d.coeffs_.size() - 1] / lead;
      q[static_cast<std::size_t>(k)] = f;
      for (std::size_t j = 0; j < d.coeffs_.size(); ++j) rem[static_cast<std::size_t>(k) + j] -= f * d.coeffs_[j];
    }
    rem.resize(d.coeffs_.size() - 1);
    return {Polynomial(std::move(q)), Polynomial(std::move(rem))};
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void normalize() {
    while (!coeffs_.empty() && coeffs_.back() == T{}) coeffs_.pop_back();
  }

  std::vector<T> coeffs_;
};

using RealPoly = Polynomial<double>;
using ComplexPoly = Polynomial<std::complex<double>>;

/// Coefficient-wise real and imaginary parts of a complex polynomial.
inline RealPoly real_part(const ComplexPoly& p) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = p.coeffs()[i].real();
  return RealPoly(std::move(v));
}

inline RealPoly imag_part(const ComplexPoly& p) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = p.coeffs()[i].imag();
  return RealPoly(std::move(v));
}

inline ComplexPoly to_complex(const RealPoly& p) {
  std::vector<std::complex<double>> v(p.coeffs().begin(), p.coeffs().end());
  return ComplexPoly(std::move(v));
}

/// Coefficient-wise conjugate: for real x, conj(p)(x) == conj(p(x)).
inline ComplexPoly conj_coeffs(const ComplexPoly& p) {
  std::vector<std::complex<double>> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = std::conj(p.coeffs()[i]);
  return ComplexPoly(std::move(v));
}

/// Coefficient-wise magnitudes. Evaluating abs_coeffs(p) at |x| bounds |p(x)|
/// and is the natural scale for judging cancellation in p's coefficients.
template <typename T>
RealPoly abs_coeffs(const Polynomial<T>& p) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = std::abs(p.coeffs()[i]);
  return RealPoly(std::move(v));
}

}  // namespace dispersia
