#pragma once

#include <stdexcept>
#include <string>

namespace svl {

// Root of every error the library throws. The CLI maps subclasses onto exit
// codes: configuration problems exit with 2, numerical failures with 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpaceError : public Error {
 public:
  using Error::Error;
};

class InvalidShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class UnphysicalParameterError : public Error {
 public:
  using Error::Error;
};

/// A physical constraint between model parameters does not hold. `relation()`
/// names the violated relation, e.g. "Omega_g2 = Omega_g1".
class ConstraintViolation : public UnphysicalParameterError {
 public:
  ConstraintViolation(std::string relation, const std::string& detail)
      : UnphysicalParameterError("constraint violated: " + relation + " (" + detail + ")"),
        relation_(std::move(relation)) {}
  const std::string& relation() const noexcept { return relation_; }

 private:
  std::string relation_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NumericDomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StiffnessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericalFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AmbiguityError : public NumericalError {
 public:
  AmbiguityError(const std::string& what, int null_dimension)
      : NumericalError(what), null_dimension_(null_dimension) {}
  int null_dimension() const noexcept { return null_dimension_; }

 private:
  int null_dimension_;
};

class UndefinedStatisticError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace svl
