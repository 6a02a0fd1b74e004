#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regcalc {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GridMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class LagMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Cholesky factorization failed even after the allowed jitter retries.
// `leading_minor` is the 1-based order of the first non-positive minor.
class CovarianceNotPsd : public std::runtime_error {
 public:
  CovarianceNotPsd(std::size_t leading_minor, const std::string& what)
      : std::runtime_error(what), leading_minor_(leading_minor) {}
  std::size_t leading_minor() const noexcept { return leading_minor_; }

 private:
  std::size_t leading_minor_;
};

class UnsupportedCombination : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureNotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A path handed to a hedging routine fails the quadratic-variation gate.
class CertificationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace regcalc
