#pragma once

#include <stdexcept>
#include <string>

namespace frachenon {

/// Argument outside the mathematical domain of an operation (e.g. alpha past the endpoint).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameter tuple violating the admissibility constraints 0<s<1, ell>-2s, p>1, N>=1, N>2s.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative numerics (shooting, bisection, quadrature) failed to reach the requested accuracy.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested integral is infinite for the given exponents.
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Identity requested on a field that is not the extension of an exact solution.
class NotASolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file; carries the offending 1-based line number.
class FormatError : public std::runtime_error {
 public:
  FormatError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace frachenon
