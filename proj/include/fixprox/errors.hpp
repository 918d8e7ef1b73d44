#ifndef FIXPROX_ERRORS_HPP
#define FIXPROX_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fixprox {

/// Raised when a caller violates a precondition (bad dimension, bad
/// parameter, rejected schedule). The CLI maps it to exit status 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iteration produces a non-finite value. The CLI maps it to
/// exit status 2.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, std::size_t iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace fixprox

#endif  // FIXPROX_ERRORS_HPP
