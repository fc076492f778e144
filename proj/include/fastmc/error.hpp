#pragma once

#include <stdexcept>
#include <string>

namespace fastmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, violated preconditions, unparsable files.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state, singular matrices, and other numerical breakdowns.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A response function (built-in or external) failed for some sample.
class SimulatorError : public Error {
 public:
  using Error::Error;
};

}  // namespace fastmc
