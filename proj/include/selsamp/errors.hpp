#pragma once

#include <stdexcept>
#include <string>

namespace selsamp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct DegenerateInstance : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };
struct InternalConsistency : Error { using Error::Error; };

// Budget too small for the design constraint. `required` is the smallest
// feasible budget when known.
struct Infeasible : Error {
  double required = 0.0;
  Infeasible(const std::string& msg, double req) : Error(msg), required(req) {}
};

// Iterative inner solver ran out of budget. `residual` is what it reached.
struct SolverFailure : Error {
  double residual = 0.0;
  SolverFailure(const std::string& msg, double res) : Error(msg), residual(res) {}
};

}  // namespace selsamp
