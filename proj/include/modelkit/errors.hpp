#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace modelkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or size disagreement between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Precondition on an argument violated (wrong half-plane, bad size, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Frequency too close to the real axis for channel operations.
class DomainTooShallow : public DomainError {
 public:
  using DomainError::DomainError;
};

class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& what, double ratio)
      : Error(what), ratio_(ratio) {}
  double ratio() const { return ratio_; }

 private:
  double ratio_;
};

// z lies on (or numerically at) the spectrum of A0.
class SingularFrequency : public SingularMatrix {
 public:
  SingularFrequency(const std::string& what, std::complex<double> z, double ratio)
      : SingularMatrix(what, ratio), z_(z) {}
  std::complex<double> z() const { return z_; }

 private:
  std::complex<double> z_;
};

// B + M(z) is not invertible: z is outside the regular set of the extension.
class SingularBoundaryOperator : public SingularMatrix {
 public:
  SingularBoundaryOperator(const std::string& what, std::complex<double> z,
                           double minsv)
      : SingularMatrix(what, minsv), z_(z) {}
  std::complex<double> z() const { return z_; }
  double minsv() const { return ratio(); }

 private:
  std::complex<double> z_;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace modelkit
