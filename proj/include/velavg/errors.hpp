#pragma once

#include <stdexcept>
#include <string>

namespace velavg {

/// Array extents or grids that do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument outside the domain where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Model data (matrices, fluxes, configs) that violates a structural requirement.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical evaluation produced a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A time step larger than the stability bound allows.
class CflError : public std::runtime_error {
 public:
  CflError(double requested, double required)
      : std::runtime_error("time step " + std::to_string(requested) +
                           " exceeds the stable bound " + std::to_string(required)),
        requested_dt(requested),
        required_dt(required) {}
  double requested_dt;
  double required_dt;
};

}  // namespace velavg
