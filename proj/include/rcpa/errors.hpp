#pragma once

#include <stdexcept>
#include <string>

namespace rcpa {

// Caller broke a precondition: mismatched base points, shapes, or bad
// arguments.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A geometric operation is undefined for its inputs (antipodal log on the
// sphere, a matrix that is not positive definite, a point off the manifold).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// sigma * tau * L^2 >= 1 without an explicit override.
class StepConditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A geometry failure inside a solver loop, tagged with the iteration index.
class SolverError : public std::runtime_error {
 public:
  SolverError(int iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " +
                           what),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcpa
