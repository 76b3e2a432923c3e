#pragma once

#include <stdexcept>
#include <string>

namespace dispersia {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid kernel description (not real-valued, empty polynomial, non-finite data).
class KernelError : public Error {
 public:
  using Error::Error;
};

/// A kernel term violates the class-K requirements (Re z >= 0 for a non-constant term).
class NotInClassK : public Error {
 public:
  using Error::Error;
};

/// A claimed or computed decay bound |nu''(t)| <= C exp(-delta t) fails at `t`.
class CertificationFailure : public Error {
 public:
  CertificationFailure(const std::string& what, double t) : Error(what), t_(t) {}
  [[nodiscard]] double violating_t() const { return t_; }

 private:
  double t_;
};

/// Laplace transform requested at a point where the chosen route is undefined.
class UnsupportedPoint : public Error {
 public:
  using Error::Error;
};

/// Operation not available for the given kernel representation.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Passivity conditions do not admit a decay exponent m.
class NoDecayExponent : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or solver breakdown.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The Volterra history grid is too short for the requested time.
class HistoryTruncation : public Error {
 public:
  HistoryTruncation(const std::string& what, double s_max) : Error(what), s_max_(s_max) {}
  [[nodiscard]] double s_max() const { return s_max_; }

 private:
  double s_max_;
};

/// Energy trace unusable for fitting (empty window after trimming).
class UnusableTrace : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or document; `field` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(field) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace dispersia
