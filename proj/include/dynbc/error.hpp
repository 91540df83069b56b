#ifndef DYNBC_ERROR_HPP
#define DYNBC_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynbc {

/// Base class of all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A structural invariant of a mesh or matrix does not hold.
class InvariantError : public Error {
public:
  using Error::Error;
};

class ArgumentError : public Error {
public:
  using Error::Error;
};

class ResourceError : public Error {
public:
  using Error::Error;
};

class AssemblyError : public Error {
public:
  using Error::Error;
};

class UnsupportedError : public Error {
public:
  using Error::Error;
};

/// Iterative solver hit its iteration cap.
class NonConvergenceError : public Error {
public:
  NonConvergenceError(const std::string& what, std::size_t iterations, double residual)
      : Error(what + " (iterations " + std::to_string(iterations) + ", residual " +
              std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

private:
  std::size_t iterations_;
  double residual_;
};

/// A state vector exceeded the blow-up threshold or became non-finite.
class BlowUpError : public Error {
public:
  BlowUpError(double time, double max_abs)
      : Error("blow-up at t=" + std::to_string(time) + " (max |entry| " + std::to_string(max_abs) +
              ")"),
        time_(time),
        max_abs_(max_abs) {}
  double time() const noexcept { return time_; }
  double max_abs() const noexcept { return max_abs_; }

private:
  double time_;
  double max_abs_;
};

}  // namespace dynbc

#endif
