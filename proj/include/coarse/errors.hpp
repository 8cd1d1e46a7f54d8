#pragma once

#include <stdexcept>
#include <string>

namespace coarse {

/// Malformed or inconsistent input: bad labels, non-stochastic vectors,
/// violated preconditions. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative solver failed to reach its stopping criterion. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace coarse
