#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tnls {

enum class ErrorKind {
  Usage,             // caller broke a precondition (basis mismatch, bad exponent, ...)
  Configuration,     // inconsistent model or solver parameters
  BasisConstruction, // numerical basis failed its self-checks
  NonConvergence,    // Picard iteration hit max_iter
  Divergence,        // contraction factor >= 1 repeatedly
  UnsupportedRegime, // operation needs n >= 2
  Smallness,         // no admissible horizon for the requested delta
  Precondition,      // exponent pair outside an estimate's range
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Solver failure that carries the Picard residual history.
class SolveError : public Error {
 public:
  SolveError(ErrorKind kind, const std::string& what, std::vector<double> residuals)
      : Error(kind, what), residuals_(std::move(residuals)) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

}  // namespace tnls
