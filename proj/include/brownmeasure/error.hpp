#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace brown {

/// Bad input: non-finite point, non-positive regularizer, inadmissible
/// parameters, malformed model.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solve did not converge, or a bracket that should exist by
/// monotonicity was not found. Carries the evaluation point and the last
/// bracket when known.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
  NumericalFailure(const std::string& what, double lo, double hi)
      : std::runtime_error(what + " [bracket " + std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        bracket_lo_(lo),
        bracket_hi_(hi) {}

  NumericalFailure at(std::complex<double> lambda) const {
    NumericalFailure copy(std::string(what()) + " at lambda=(" + std::to_string(lambda.real()) + "," +
                          std::to_string(lambda.imag()) + ")");
    copy.lambda_ = lambda;
    copy.bracket_lo_ = bracket_lo_;
    copy.bracket_hi_ = bracket_hi_;
    return copy;
  }

  std::optional<std::complex<double>> lambda() const noexcept { return lambda_; }
  double bracket_lo() const noexcept { return bracket_lo_; }
  double bracket_hi() const noexcept { return bracket_hi_; }

 private:
  std::optional<std::complex<double>> lambda_;
  double bracket_lo_ = 0.0;
  double bracket_hi_ = 0.0;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs fn(), tagging any NumericalFailure that escapes without a point with lambda.
template <class Fn>
auto with_lambda(std::complex<double> lambda, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalFailure& e) {
    if (e.lambda()) throw;
    throw e.at(lambda);
  }
}

}  // namespace brown
