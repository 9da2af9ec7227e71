#pragma once

#include <stdexcept>
#include <string>

namespace ddlab {

/// Violated precondition or invalid parameter of a public operation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulation could not continue: non-finite values, or the state left the
/// flux working range.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace ddlab
